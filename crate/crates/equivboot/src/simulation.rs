//! Monte Carlo study: scenario families, rejection probabilities and
//! sweep tables.
//!
//! Four built-in six-class scenario families exercise the test where its
//! asymptotics differ: two sup-norm families whose extreme set has one
//! resp. two coordinates, and two L1 families with zero resp. one matched
//! coordinate. Each family is indexed by a separation parameter `delta`
//! with a closed-form norm identity, so boundary, interior-null and
//! alternative configurations can be dialed in exactly.

use std::fmt::Write as _;

use crate::bootstrap::{equivalence_test, TestConfig};
use crate::error::{Error, Result};
use crate::norms::NormKind;
use crate::par::map_indexed;
use crate::sampling::{multinomial_sample, RngStream};
use crate::simplex::ProbVector;

/// The built-in scenario families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinScenario {
    /// One-spike sup-norm family, `||p - q||_inf = |1 - 2 delta|`, extreme
    /// set of size one.
    Det15,
    /// Two-spike sup-norm family, `||p - q||_inf = |0.5 - delta|`, extreme
    /// set of size two.
    Det16,
    /// L1 family with every coordinate distinct, `||p - q||_1 = 0.15 + 2 delta`.
    Det17,
    /// L1 family with the first coordinate matched, `||p - q||_1 = 0.1 + 2 delta`.
    Det18,
}

impl BuiltinScenario {
    pub const ALL: [BuiltinScenario; 4] = [
        BuiltinScenario::Det15,
        BuiltinScenario::Det16,
        BuiltinScenario::Det17,
        BuiltinScenario::Det18,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BuiltinScenario::Det15 => "det15",
            BuiltinScenario::Det16 => "det16",
            BuiltinScenario::Det17 => "det17",
            BuiltinScenario::Det18 => "det18",
        }
    }

    /// Open domain of the separation parameter.
    pub fn delta_domain(self) -> (f64, f64) {
        match self {
            BuiltinScenario::Det15 | BuiltinScenario::Det16 => (0.0, 1.0),
            BuiltinScenario::Det17 | BuiltinScenario::Det18 => (0.0, 0.4),
        }
    }

    /// Norm the family was designed for.
    pub fn natural_norm(self) -> NormKind {
        match self {
            BuiltinScenario::Det15 | BuiltinScenario::Det16 => NormKind::LInf,
            BuiltinScenario::Det17 | BuiltinScenario::Det18 => NormKind::L1,
        }
    }

    /// Value of the natural norm of `p(delta) - q(delta)`.
    pub fn norm_identity(self, delta: f64) -> f64 {
        match self {
            BuiltinScenario::Det15 => (1.0 - 2.0 * delta).abs(),
            BuiltinScenario::Det16 => (0.5 - delta).abs(),
            BuiltinScenario::Det17 => 0.15 + 2.0 * delta,
            BuiltinScenario::Det18 => 0.1 + 2.0 * delta,
        }
    }

    /// The `delta` at which the natural norm equals `epsilon`, if it lies
    /// in the domain.
    pub fn boundary_delta(self, epsilon: f64) -> Option<f64> {
        let delta = match self {
            BuiltinScenario::Det15 => (1.0 - epsilon) / 2.0,
            BuiltinScenario::Det16 => 0.5 - epsilon,
            BuiltinScenario::Det17 => (epsilon - 0.15) / 2.0,
            BuiltinScenario::Det18 => (epsilon - 0.1) / 2.0,
        };
        let (lo, hi) = self.delta_domain();
        (delta > lo && delta < hi).then_some(delta)
    }
}

impl std::str::FromStr for BuiltinScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det15" => Ok(BuiltinScenario::Det15),
            "det16" => Ok(BuiltinScenario::Det16),
            "det17" => Ok(BuiltinScenario::Det17),
            "det18" => Ok(BuiltinScenario::Det18),
            _ => Err(Error::InvalidConfig(
                "scenario must be one of det15, det16, det17, det18",
            )),
        }
    }
}

/// The probability vectors of a built-in family at parameter `delta`.
///
/// `k` must be 6; the families are printed for six classes.
pub fn scenario_vectors(
    name: BuiltinScenario,
    delta: f64,
    k: usize,
) -> Result<(ProbVector, ProbVector)> {
    if k != 6 {
        return Err(Error::BadDimension(k));
    }
    let (lo, hi) = name.delta_domain();
    if !(delta > lo && delta < hi) || !delta.is_finite() {
        return Err(Error::BadDelta {
            name: name.label(),
            delta,
            lo,
            hi,
        });
    }
    let (p, q) = match name {
        BuiltinScenario::Det15 => {
            let mut p = vec![delta / 5.0; 6];
            p[0] = 1.0 - delta;
            let mut q = vec![(1.0 - delta) / 5.0; 6];
            q[0] = delta;
            (p, q)
        }
        BuiltinScenario::Det16 => {
            let mut p = vec![delta / 4.0; 6];
            p[0] = (1.0 - delta) / 2.0;
            p[1] = (1.0 - delta) / 2.0;
            let mut q = vec![(1.0 - delta) / 4.0; 6];
            q[0] = delta / 2.0;
            q[1] = delta / 2.0;
            (p, q)
        }
        BuiltinScenario::Det17 => (
            vec![0.1, 0.1, 0.1, 0.2, 0.1, 0.4],
            vec![0.125, 0.125, 0.125, 0.125, 0.1 + delta, 0.4 - delta],
        ),
        BuiltinScenario::Det18 => (
            vec![0.1, 0.1, 0.1, 0.2, 0.1, 0.4],
            vec![0.1, 0.125, 0.125, 0.15, 0.1 + delta, 0.4 - delta],
        ),
    };
    Ok((ProbVector::new(p)?, ProbVector::new(q)?))
}

/// A data-generating configuration for the harness: a labeled pair of
/// probability vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub delta: f64,
    pub p: ProbVector,
    pub q: ProbVector,
}

impl Scenario {
    pub fn builtin(name: BuiltinScenario, delta: f64) -> Result<Self> {
        let (p, q) = scenario_vectors(name, delta, 6)?;
        Ok(Self {
            label: name.label().to_string(),
            delta,
            p,
            q,
        })
    }

    /// A custom pair; the `delta` column of sweep output is recorded as 0.
    pub fn custom(p: ProbVector, q: ProbVector) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                left: p.dim(),
                right: q.dim(),
            });
        }
        Ok(Self {
            label: "custom".to_string(),
            delta: 0.0,
            p,
            q,
        })
    }

    pub fn k(&self) -> usize {
        self.p.dim()
    }
}

/// Estimated rejection probability of the test under a scenario.
///
/// Replication `r` draws its data and its test seed from the stream
/// `root/rep/r`, so the estimate is deterministic given the stream and
/// independent of scheduling. Returns `(rate, mc_stderr)` with
/// `mc_stderr = sqrt(rate (1 - rate) / reps)`.
pub fn rejection_probability(
    scenario: &Scenario,
    n1: u64,
    n2: u64,
    reps: usize,
    config: &TestConfig,
    stream: &RngStream,
) -> Result<(f64, f64)> {
    assert!(reps >= 1, "need at least one replication");
    config.validate()?;
    let outcomes = map_indexed(reps, |r| {
        let rep = stream.derive("rep", r as u64);
        let mut rng = rep.derive("data", 0).rng();
        let x = multinomial_sample(n1, &scenario.p, &mut rng);
        let y = multinomial_sample(n2, &scenario.q, &mut rng);
        let mut rep_config = config.clone();
        rep_config.seed = rep.derive("test", 0).seed_u64();
        equivalence_test(&x, &y, &rep_config).map(|report| report.reject)
    });
    let mut rejects = 0usize;
    for outcome in outcomes {
        if outcome? {
            rejects += 1;
        }
    }
    let rate = rejects as f64 / reps as f64;
    let stderr = (rate * (1.0 - rate) / reps as f64).sqrt();
    Ok((rate, stderr))
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub delta: f64,
    pub n1: u64,
    pub n2: u64,
    pub norm: NormKind,
    pub epsilon: f64,
    pub alpha: f64,
    pub reps: u64,
    pub b: u64,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
    pub seed: u64,
}

/// A grid cell of a sweep: scenario plus sample sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub scenario: Scenario,
    pub n1: u64,
    pub n2: u64,
}

/// Run every grid cell and return rows ordered lexicographically by
/// `(scenario, norm, n1, delta)`.
///
/// Each cell is seeded from its own coordinates, not from its position in
/// the grid, so permuting or re-running subsets of the grid reproduces the
/// same rows.
pub fn sweep(
    cells: &[SweepCell],
    reps: usize,
    config: &TestConfig,
    root: &RngStream,
) -> Result<Vec<SweepRow>> {
    assert!(!cells.is_empty(), "empty sweep grid");
    let mut ordered: Vec<&SweepCell> = cells.iter().collect();
    ordered.sort_by(|a, b| {
        (a.scenario.label.as_str(), a.n1)
            .cmp(&(b.scenario.label.as_str(), b.n1))
            .then(a.scenario.delta.total_cmp(&b.scenario.delta))
            .then(a.n2.cmp(&b.n2))
    });

    let mut rows = Vec::with_capacity(ordered.len());
    for cell in ordered {
        let seed = cell_seed(root, cell, reps, config);
        let cell_stream = RngStream::from_seed(seed);
        let (rate, stderr) =
            rejection_probability(&cell.scenario, cell.n1, cell.n2, reps, config, &cell_stream)?;
        rows.push(SweepRow {
            scenario: cell.scenario.label.clone(),
            delta: cell.scenario.delta,
            n1: cell.n1,
            n2: cell.n2,
            norm: config.norm,
            epsilon: config.epsilon,
            alpha: config.alpha,
            reps: reps as u64,
            b: config.bootstrap_b as u64,
            rejection_rate: rate,
            mc_stderr: stderr,
            seed,
        });
    }
    Ok(rows)
}

fn cell_seed(root: &RngStream, cell: &SweepCell, reps: usize, config: &TestConfig) -> u64 {
    root.derive(&cell.scenario.label, 0)
        .derive("delta", cell.scenario.delta.to_bits())
        .derive("n1", cell.n1)
        .derive("n2", cell.n2)
        .derive("norm", config.norm as u64)
        .derive("eps", config.epsilon.to_bits())
        .derive("alpha", config.alpha.to_bits())
        .derive("reps", reps as u64)
        .derive("b", config.bootstrap_b as u64)
        .seed_u64()
}

/// CSV header of sweep output.
pub const SWEEP_CSV_HEADER: &str =
    "scenario,delta,n1,n2,norm,epsilon,alpha,reps,B,rejection_rate,mc_stderr,seed";

/// Render rows as CSV (UTF-8, LF line endings, rates at full precision).
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        // 17 significant digits round-trip any f64.
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.16e},{:.16e},{}",
            row.scenario,
            row.delta,
            row.n1,
            row.n2,
            row.norm,
            row.epsilon,
            row.alpha,
            row.reps,
            row.b,
            row.rejection_rate,
            row.mc_stderr,
            row.seed
        );
    }
    out
}

/// Parse sweep CSV back into rows. Accepts exactly the format written by
/// [`sweep_to_csv`].
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or(Error::InvalidConfig("empty CSV input"))?;
    if header.trim_end() != SWEEP_CSV_HEADER {
        return Err(Error::InvalidConfig("unexpected CSV header"));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::InvalidConfig("CSV row must have 12 fields"));
        }
        rows.push(SweepRow {
            scenario: fields[0].to_string(),
            delta: parse_f64(fields[1])?,
            n1: parse_u64(fields[2])?,
            n2: parse_u64(fields[3])?,
            norm: fields[4].parse()?,
            epsilon: parse_f64(fields[5])?,
            alpha: parse_f64(fields[6])?,
            reps: parse_u64(fields[7])?,
            b: parse_u64(fields[8])?,
            rejection_rate: parse_f64(fields[9])?,
            mc_stderr: parse_f64(fields[10])?,
            seed: parse_u64(fields[11])?,
        });
    }
    Ok(rows)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::InvalidConfig("malformed numeric CSV field"))
}

fn parse_u64(s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::InvalidConfig("malformed integer CSV field"))
}

/// Default `delta` grid of nine points around the boundary for `epsilon`,
/// clipped to the scenario's domain.
pub fn default_delta_grid(name: BuiltinScenario, epsilon: f64) -> Vec<f64> {
    let (lo, hi) = name.delta_domain();
    let center = name.boundary_delta(epsilon).unwrap_or((lo + hi) / 2.0);
    let spread = match name {
        BuiltinScenario::Det15 | BuiltinScenario::Det16 => 0.08,
        BuiltinScenario::Det17 | BuiltinScenario::Det18 => 0.04,
    };
    (0..9)
        .map(|i| center - spread + i as f64 * (spread / 4.0))
        .filter(|&d| d > lo + 1e-9 && d < hi - 1e-9)
        .collect()
}
