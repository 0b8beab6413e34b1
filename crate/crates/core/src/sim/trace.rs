//! Uniformly sampled named channels with event markers.

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub time: Vec<f64>,
    pub names: Vec<String>,
    /// one vector per channel, each as long as `time`
    pub data: Vec<Vec<f64>>,
    pub events: Vec<(f64, String)>,
}

impl Trace {
    pub fn new(names: Vec<String>) -> Self {
        let data = vec![Vec::new(); names.len()];
        Self { time: Vec::new(), names, data, events: Vec::new() }
    }

    pub fn push(&mut self, t: f64, values: &[f64]) {
        assert_eq!(values.len(), self.names.len(), "sample width");
        debug_assert!(self.time.last().is_none_or(|&l| t > l), "time must increase");
        self.time.push(t);
        for (c, v) in self.data.iter_mut().zip(values) {
            c.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.data[k].as_slice())
    }

    /// Index of the last sample at or before `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.time.partition_point(|&s| s <= t + 1e-12).saturating_sub(1)
    }

    pub fn dt(&self) -> Option<f64> {
        (self.time.len() > 1).then(|| self.time[1] - self.time[0])
    }
}
