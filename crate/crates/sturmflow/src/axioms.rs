//! Axiomatic self-tests for the crossing-sum index on superlagrangian paths:
//! localization, catenation and homotopy invariance, exercised on graph
//! paths with independently known index values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hermitian::{inertia, CMatrix, HermMatrix, TolerancePolicy};
use crate::superlag::{em_index, standard_space, SuperlagFrame, SuperlagPath};

#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct AxiomBattery {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomBattery {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    g.qr().q()
}

fn random_hermitian<R: Rng>(n: usize, mag: f64, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-mag..mag), rng.gen_range(-mag..mag))
    });
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Index of the graph path t -> graph(H(t)) against the horizontal plane
/// graph(0), restricted to [a, b].
fn graph_index<R: Rng>(
    h: &dyn Fn(f64) -> CMatrix,
    a: f64,
    b: f64,
    negate: bool,
    tol: &TolerancePolicy,
    rng: &mut R,
) -> Result<i64> {
    let n = h(a).nrows();
    let space = standard_space(n, tol);
    let p0 = SuperlagFrame::graph(&CMatrix::zeros(n, n));
    let path = SuperlagPath::new(a, b, |t| Ok(SuperlagFrame::graph(&h(t))));
    let (index, _) = em_index(&path, &p0, &space, tol, rng)?;
    Ok(if negate { -index } else { index })
}

fn half_signature(h: &CMatrix, tol: &TolerancePolicy) -> f64 {
    0.5 * inertia(&HermMatrix::new(h.clone()).expect("Hermitian path value"), tol).signature()
        as f64
}

fn check(name: &str, run: impl FnOnce() -> Result<(i64, i64)>) -> AxiomCheck {
    match run() {
        Ok((got, want)) => AxiomCheck {
            name: name.to_string(),
            passed: got == want,
            detail: format!("computed {got}, expected {want}"),
        },
        Err(e) => AxiomCheck {
            name: name.to_string(),
            passed: false,
            detail: format!("pipeline error: {e}"),
        },
    }
}

/// Runs the full battery.  `negate_gamma` deliberately flips the sign of
/// every computed crossing sum; it exists as a sentinel so the battery can
/// demonstrate that the localization check has teeth (it must fail when the
/// sign convention is inverted).
pub fn run_battery(seed: u64, negate_gamma: bool, tol: &TolerancePolicy) -> AxiomBattery {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Localization: the index of t -> graph(H(t)) over an isolated crossing
    // equals (1/2) sign H(b) - (1/2) sign H(a).
    for (case, n) in [(0usize, 1usize), (1, 2), (2, 3)] {
        let u = random_unitary(n, &mut rng);
        let shifts: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.7..0.7)).collect();
        let flip = case == 1; // one descending family among the cases
        let u2 = u.clone();
        let shifts2 = shifts.clone();
        let h = move |t: f64| -> CMatrix {
            let d = DMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    let v = if flip { shifts2[r] - t } else { t - shifts2[r] };
                    Complex64::new(v, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            &u2 * d * u2.adjoint()
        };
        let expected = (half_signature(&h(1.0), tol) - half_signature(&h(-1.0), tol)) as i64;
        checks.push(check(&format!("localization[{case}]"), || {
            let got = graph_index(&h, -1.0, 1.0, negate_gamma, tol, &mut rng)?;
            Ok((got, expected))
        }));
    }

    // Catenation: splitting the interval at a regular point preserves the
    // crossing sum.
    {
        let n = 2;
        let u = random_unitary(n, &mut rng);
        let u2 = u.clone();
        let h = move |t: f64| -> CMatrix {
            let d = DMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    Complex64::new(t - if r == 0 { 0.4 } else { 0.6 }, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            &u2 * d * u2.adjoint()
        };
        for split in [0.25, 0.5, 0.75] {
            checks.push(check(&format!("catenation[split={split}]"), || {
                let full = graph_index(&h, 0.0, 1.0, negate_gamma, tol, &mut rng)?;
                let left = graph_index(&h, 0.0, split, negate_gamma, tol, &mut rng)?;
                let right = graph_index(&h, split, 1.0, negate_gamma, tol, &mut rng)?;
                Ok((left + right, full))
            }));
        }
    }

    // Homotopy invariance: perturbations vanishing at the endpoints leave
    // the index unchanged.
    {
        let n = 2;
        let k = random_hermitian(n, 0.5, &mut rng);
        let base = |t: f64| -> CMatrix {
            CMatrix::identity(n, n) * Complex64::new(t, 0.0)
        };
        let reference = match graph_index(&base, -1.0, 1.0, negate_gamma, tol, &mut rng) {
            Ok(v) => v,
            Err(e) => {
                checks.push(AxiomCheck {
                    name: "homotopy[base]".into(),
                    passed: false,
                    detail: format!("pipeline error: {e}"),
                });
                return AxiomBattery { checks };
            }
        };
        for s in [0.1, 0.2] {
            let k2 = k.clone();
            let h = move |t: f64| -> CMatrix {
                let bump = (std::f64::consts::PI * t).sin() * s;
                CMatrix::identity(n, n) * Complex64::new(t, 0.0)
                    + &k2 * Complex64::new(bump, 0.0)
            };
            checks.push(check(&format!("homotopy[s={s}]"), || {
                let got = graph_index(&h, -1.0, 1.0, negate_gamma, tol, &mut rng)?;
                Ok((got, reference))
            }));
        }
    }

    AxiomBattery { checks }
}
