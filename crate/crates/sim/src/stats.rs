use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Point estimate with a 95% batch-means half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn contains(&self, v: f64) -> bool {
        (v - self.mean).abs() <= self.half_width
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        (self.mean - other.mean).abs() <= self.half_width + other.half_width
    }
}

/// Student-t 95% half-width of the mean of `values`.
pub fn batch_means(values: &[f64]) -> Estimate {
    let k = values.len();
    if k == 0 {
        return Estimate { mean: f64::NAN, half_width: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return Estimate { mean, half_width: f64::INFINITY };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (k - 1) as f64)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(1.96);
    Estimate { mean, half_width: t * (var / k as f64).sqrt() }
}

/// Per-batch sums collected while the run progresses.
#[derive(Debug, Clone, Default)]
pub(crate) struct Batch {
    pub deliveries: u64,
    pub sojourn_sum: f64,
    pub service_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    /// Delivered payload time per mini-slot (normalized throughput).
    pub throughput: Estimate,
    /// Delivered packets per `t_Suc`.
    pub throughput_packets: Estimate,
    /// Arrival to end of successful transmission, mini-slots.
    pub mean_sojourn: Estimate,
    /// HOL start to end of successful transmission, mini-slots.
    pub mean_service: f64,
    /// Collisions per started busy period.
    pub collision_rate: f64,
    /// Time fraction with `k` backlogged nodes, `k = 0..=n`.
    pub busy_nodes: Vec<f64>,
    /// Transmission attempts per backoff phase `0..=K`.
    pub phase_attempts: Vec<u64>,
    /// Idle sensing slots spent per backoff phase `0..=K`.
    pub phase_sensing: Vec<u64>,
    /// Mini-slots measured after warmup.
    pub measured_slots: u64,
    pub successes: u64,
    pub collisions: u64,
    /// Whole-run counters, warmup included.
    pub arrived: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub queued: u64,
    pub in_service: u64,
}

impl SimStats {
    /// `arrived = delivered + dropped + queued + in_service`.
    pub fn conserved(&self) -> bool {
        self.arrived == self.delivered + self.dropped + self.queued + self.in_service
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_interval() {
        let e = batch_means(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(e.mean, 3.0);
        // t_{0.975, 4} = 2.776, s = 1.5811
        assert!((e.half_width - 2.776445 * 1.581139 / 5f64.sqrt()).abs() < 1e-4);
        assert!(e.contains(4.9) && !e.contains(5.0));
        assert!(batch_means(&[]).mean.is_nan());
    }
}
