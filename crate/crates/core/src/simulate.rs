//! Seeded Monte Carlo emulation of a scanning photon-number-resolving
//! detector.
//!
//! Every scan position draws from its own ChaCha8 stream selected by the
//! position index, so the table does not depend on execution order or on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::photon_stats::{DetectionModel, SourceStatistics};
use crate::profiles::IrradianceProfile;
use crate::{Error, Result};

/// Detector scan geometry and pulse budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub x_positions: Vec<f64>,
    pub pulses_per_position: u64,
    pub detection: DetectionModel,
    pub seed: u64,
}

impl ScanPlan {
    pub fn new(
        x_positions: Vec<f64>,
        pulses_per_position: u64,
        detection: DetectionModel,
        seed: u64,
    ) -> Result<Self> {
        let plan = Self {
            x_positions,
            pulses_per_position,
            detection,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Evenly stepped positions covering `[lo, hi]`, starting at `lo`.
    pub fn stepped(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0 && step.is_finite() && hi > lo) {
            return Err(Error::config("scan.step_m", format!("need step > 0 and lo < hi, got step {step}")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| lo + step * i as f64).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_positions.len() < 2 {
            return Err(Error::config("scan.positions", "need at least 2 positions"));
        }
        if self.x_positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("scan.positions", "positions must be finite"));
        }
        if self.x_positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("scan.positions", "positions must be strictly increasing"));
        }
        if self.pulses_per_position == 0 {
            return Err(Error::config("scan.pulses", "need at least one pulse per position"));
        }
        self.detection.validate()
    }
}

/// Photon-number histogram at one scan position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub x: f64,
    /// `counts[k]` for `k = 0..=k_max`.
    pub counts: Vec<u64>,
    /// Pulses with more than `k_max` photons.
    pub overflow: u64,
    pub total: u64,
}

/// Per-position photon-number histograms of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub k_max: u32,
    pub rows: Vec<CountRow>,
}

impl CountTable {
    pub fn positions(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    /// Checks `Σ counts + overflow = total` at every position.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.counts.len() != self.k_max as usize + 1 {
                return Err(Error::config(
                    format!("rows[{i}].counts"),
                    format!("expected {} bins, found {}", self.k_max + 1, row.counts.len()),
                ));
            }
            let sum: u64 = row.counts.iter().sum::<u64>() + row.overflow;
            if sum != row.total || row.total == 0 {
                return Err(Error::config(
                    format!("rows[{i}].total"),
                    format!("counts sum to {sum} but total is {}", row.total),
                ));
            }
        }
        Ok(())
    }

    /// CSV with columns `x_m, k0..k{k_max}, overflow, total`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["x_m".to_string()];
        header.extend((0..=self.k_max).map(|k| format!("k{k}")));
        header.push("overflow".into());
        header.push("total".into());
        // writing into a Vec cannot fail
        w.write_record(&header).expect("in-memory csv");
        for row in &self.rows {
            let mut rec = vec![row.x.to_string()];
            rec.extend(row.counts.iter().map(u64::to_string));
            rec.push(row.overflow.to_string());
            rec.push(row.total.to_string());
            w.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("ascii csv")
    }

    /// Parses the format written by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let bad = |msg: String| Error::config("counts_csv", msg);
        let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        let n = header.len();
        if n < 4 || &header[0] != "x_m" || &header[n - 2] != "overflow" || &header[n - 1] != "total" {
            return Err(bad("header must be x_m, k0..kN, overflow, total".into()));
        }
        for (k, name) in header.iter().skip(1).take(n - 3).enumerate() {
            if name != format!("k{k}") {
                return Err(bad(format!("column {} should be k{k}, found {name}", k + 1)));
            }
        }
        let k_max = (n - 4) as u32;
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let int = |j: usize| {
                record[j]
                    .parse::<u64>()
                    .map_err(|e| bad(format!("row {i} column {j}: {e}")))
            };
            let x = record[0]
                .parse::<f64>()
                .map_err(|e| bad(format!("row {i} x_m: {e}")))?;
            let counts = (1..n - 2).map(int).collect::<Result<Vec<_>>>()?;
            rows.push(CountRow {
                x,
                counts,
                overflow: int(n - 2)?,
                total: int(n - 1)?,
            });
        }
        let table = CountTable { k_max, rows };
        table.validate()?;
        Ok(table)
    }
}

/// JSON provenance record: the scenario inputs together with the counts.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord<'a> {
    pub source: &'a SourceStatistics,
    pub profile: &'a IrradianceProfile,
    pub peak_mean: f64,
    pub plan: &'a ScanPlan,
    pub table: &'a CountTable,
}

impl ScanRecord<'_> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan record is always serializable")
    }
}

/// Simulates the scan on the current rayon pool.
pub fn run_scan(
    src: &SourceStatistics,
    profile: &IrradianceProfile,
    peak_mean: f64,
    plan: &ScanPlan,
) -> Result<CountTable> {
    plan.validate()?;
    src.validate()?;
    let (source, eta) = src.scaled_to_peak_mean(peak_mean)?;
    let k_max = plan.detection.k_max;
    let rows = plan
        .x_positions
        .par_iter()
        .enumerate()
        .map(|(index, &x)| {
            let mut rng = position_rng(plan.seed, index);
            let t2 = eta * profile.transmission(x);
            simulate_position(&source, t2, x, plan.pulses_per_position, k_max, &mut rng)
        })
        .collect();
    Ok(CountTable { k_max, rows })
}

/// [`run_scan`] on a dedicated pool with `threads` workers.
pub fn run_scan_with_threads(
    src: &SourceStatistics,
    profile: &IrradianceProfile,
    peak_mean: f64,
    plan: &ScanPlan,
    threads: usize,
) -> Result<CountTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| run_scan(src, profile, peak_mean, plan))
}

/// Independent stream for scan position `index`.
pub fn position_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn simulate_position(
    source: &SourceStatistics,
    t2: f64,
    x: f64,
    pulses: u64,
    k_max: u32,
    rng: &mut ChaCha8Rng,
) -> CountRow {
    let mut counts = vec![0u64; k_max as usize + 1];
    let mut overflow = 0u64;
    let mut record = |k: u64| {
        if k > k_max as u64 {
            overflow += 1;
        } else {
            counts[k as usize] += 1;
        }
    };
    let mean = source.mean() * t2;
    match source {
        _ if t2 <= 0.0 => counts[0] = pulses,
        SourceStatistics::Coherent { .. } => {
            // mean > 0 here, so construction cannot fail
            let poisson = Poisson::new(mean).expect("positive Poisson mean");
            for _ in 0..pulses {
                record(poisson.sample(rng) as u64);
            }
        }
        SourceStatistics::Thermal { .. } => {
            // P(K >= k) = q^k with q = m/(1+m): invert a uniform on (0, 1]
            let ln_q = (mean / (1.0 + mean)).ln();
            for _ in 0..pulses {
                let u = 1.0 - rng.random::<f64>();
                record((u.ln() / ln_q).floor() as u64);
            }
        }
        SourceStatistics::Fock { photons } => {
            for _ in 0..pulses {
                record(thin(*photons as u64, t2, rng));
            }
        }
        SourceStatistics::Tabulated { pmf } => {
            let cdf: Vec<f64> = pmf
                .iter()
                .scan(0.0, |acc, p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect();
            for _ in 0..pulses {
                let u = rng.random::<f64>() * cdf[cdf.len() - 1];
                let j = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                record(thin(j as u64, t2, rng));
            }
        }
    }
    CountRow {
        x,
        counts,
        overflow,
        total: pulses,
    }
}

/// Keeps each of `n` photons independently with probability `t2`.
fn thin(n: u64, t2: f64, rng: &mut ChaCha8Rng) -> u64 {
    if t2 >= 1.0 {
        return n;
    }
    (0..n).filter(|_| rng.random::<f64>() < t2).count() as u64
}

/// Mean detected photon number per pulse, `Σ k·n_k / total`; overflow excluded.
pub fn reconstruct_classical(table: &CountTable) -> Vec<f64> {
    table
        .rows
        .iter()
        .map(|row| {
            let weighted: u64 = row.counts.iter().enumerate().map(|(k, &n)| k as u64 * n).sum();
            weighted as f64 / row.total as f64
        })
        .collect()
}

/// Click fraction of a non-number-resolving detector; overflow counts as a click.
pub fn reconstruct_spd(table: &CountTable) -> Vec<f64> {
    table
        .rows
        .iter()
        .map(|row| (row.total - row.counts[0]) as f64 / row.total as f64)
        .collect()
}

/// Rate of exactly `k` detected photons per position, indexed `[k][position]`.
pub fn per_k_profiles(table: &CountTable) -> Vec<Vec<f64>> {
    (0..=table.k_max as usize)
        .map(|k| {
            table
                .rows
                .iter()
                .map(|row| row.counts[k] as f64 / row.total as f64)
                .collect()
        })
        .collect()
}

/// Overflow rate per position.
pub fn overflow_rates(table: &CountTable) -> Vec<f64> {
    table
        .rows
        .iter()
        .map(|row| row.overflow as f64 / row.total as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{IrradianceProfile, SlitGeometry};

    fn slit() -> IrradianceProfile {
        IrradianceProfile::slit(SlitGeometry::new(250e-6, 1550e-9, 0.23).unwrap()).unwrap()
    }

    fn plan(positions: Vec<f64>, pulses: u64, k_max: u32) -> ScanPlan {
        ScanPlan::new(positions, pulses, DetectionModel::number_resolving(k_max).unwrap(), 7).unwrap()
    }

    #[test]
    fn dark_positions_count_only_zero() {
        let profile = IrradianceProfile::tabulated(vec![-1.0, 1.0], vec![1.0, 1.0])
            .unwrap()
            .with_center(10.0);
        let src = SourceStatistics::coherent(3.6).unwrap();
        let table = run_scan(&src, &profile, 3.6, &plan(vec![-5.0, 0.0, 5.0], 1000, 9)).unwrap();
        for row in &table.rows {
            assert_eq!(row.counts[0], 1000);
            assert_eq!(row.overflow, 0);
        }
        assert!(reconstruct_classical(&table).iter().all(|&m| m == 0.0));
        assert!(reconstruct_spd(&table).iter().all(|&m| m == 0.0));
    }

    #[test]
    fn lossless_fock_is_deterministic() {
        let profile = IrradianceProfile::gaussian(1.0).unwrap();
        let src = SourceStatistics::fock(5);
        let table = run_scan(&src, &profile, 5.0, &plan(vec![0.0, 1e-12], 500, 9)).unwrap();
        assert_eq!(table.rows[0].counts[5], 500);
        assert!(reconstruct_spd(&table).iter().all(|&c| c == 1.0));
    }

    #[test]
    fn overflow_goes_to_spd_not_classical() {
        let table = CountTable {
            k_max: 2,
            rows: vec![CountRow {
                x: 0.0,
                counts: vec![50, 0, 40],
                overflow: 10,
                total: 100,
            }],
        };
        table.validate().unwrap();
        assert_eq!(reconstruct_classical(&table), vec![0.8]);
        assert_eq!(reconstruct_spd(&table), vec![0.5]);
        assert_eq!(overflow_rates(&table), vec![0.1]);
    }

    #[test]
    fn classical_reconstruction_arithmetic() {
        let table = CountTable {
            k_max: 3,
            rows: vec![CountRow {
                x: 0.0,
                counts: vec![50, 0, 50, 0],
                overflow: 0,
                total: 100,
            }],
        };
        assert_eq!(reconstruct_classical(&table), vec![1.0]);
        let rates = per_k_profiles(&table);
        assert_eq!(rates.len(), 4);
        assert_eq!(rates[1], vec![0.0]);
    }

    #[test]
    fn counts_partition_pulses() {
        let src = SourceStatistics::thermal(4.0).unwrap();
        let table = run_scan(&src, &slit(), 4.0, &plan(slit().grid(9), 2000, 3)).unwrap();
        table.validate().unwrap();
        let rates = per_k_profiles(&table);
        let over = overflow_rates(&table);
        for i in 0..table.rows.len() {
            let s: f64 = rates.iter().map(|r| r[i]).sum::<f64>() + over[i];
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plan_validation() {
        let det = DetectionModel::number_resolving(9).unwrap();
        assert!(ScanPlan::new(vec![0.0], 10, det, 1).is_err());
        assert!(ScanPlan::new(vec![0.0, 0.0], 10, det, 1).is_err());
        assert!(ScanPlan::new(vec![0.0, 1.0], 0, det, 1).is_err());
        assert_eq!(ScanPlan::stepped(0.0, 1.0, 0.25).unwrap().len(), 5);
    }

    #[test]
    fn csv_rejects_inconsistent_totals() {
        let text = "x_m,k0,k1,overflow,total\n0,5,5,0,11\n";
        assert!(CountTable::from_csv(text).is_err());
        let text = "x_m,k0,k2,overflow,total\n0,5,5,0,10\n";
        assert!(CountTable::from_csv(text).is_err());
    }
}
