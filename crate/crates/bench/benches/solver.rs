use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hubsim_bench::{initialized, short_trip};
use hubsim_core::devices::Fidelity;
use hubsim_core::scenario::run_mode;
use hubsim_core::sim::{linearize, Dynamics, InertiaConfig};
use hubsim_core::techno::{tco_sweep, TcoAssumptions};

fn rhs(c: &mut Criterion) {
    let mut g = c.benchmark_group("rhs");
    for mode in [Fidelity::Emt, Fidelity::Phasor] {
        let (sys, x) = initialized(InertiaConfig::Low, mode);
        let mut f = vec![0.0; x.len()];
        g.bench_with_input(BenchmarkId::from_parameter(mode.name()), &x, |b, x| {
            b.iter(|| sys.rhs(black_box(x), &mut f).unwrap())
        });
    }
    g.finish();
}

fn scenario(c: &mut Criterion) {
    let mut g = c.benchmark_group("converter_trip_0.2s");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for inertia in [InertiaConfig::Zero, InertiaConfig::Low] {
        let cfg = short_trip(inertia, 0.2);
        for mode in [Fidelity::Emt, Fidelity::Phasor] {
            let id = format!("{}/{}", inertia.name(), mode.name());
            g.bench_function(id, |b| b.iter(|| run_mode(black_box(&cfg), mode).unwrap()));
        }
    }
    g.finish();
}

fn small_signal(c: &mut Criterion) {
    let (sys, x) = initialized(InertiaConfig::Low, Fidelity::Phasor);
    let mut g = c.benchmark_group("linearize");
    g.sample_size(10);
    g.bench_function("low/phasor", |b| b.iter(|| linearize(&sys, black_box(&x)).unwrap()));
    g.finish();
}

fn tco(c: &mut Criterion) {
    let a = TcoAssumptions::default();
    c.bench_function("tco_sweep_100km", |b| b.iter(|| tco_sweep(400.0, black_box(100.0), 1.0, &a).unwrap()));
}

criterion_group!(benches, rhs, scenario, small_signal, tco);
criterion_main!(benches);
