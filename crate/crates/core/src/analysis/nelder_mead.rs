//! Bounded Nelder–Mead simplex minimizer.
//!
//! Works in step-normalized coordinates `x = x0 + step ⊙ t`; the simplex
//! diameter used for convergence is measured in `t`. Trial points are
//! projected onto the bounds before evaluation.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Simplex diameter (in units of the initial steps) at which to stop.
    pub tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn minimize(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    bounds: &[(f64, f64)],
    options: NelderMeadOptions,
) -> Minimum {
    let n = x0.len();
    assert!(steps.len() == n && bounds.len() == n, "dimension mismatch");
    // a start on an upper bound would project its first vertex back onto x0
    // and collapse the simplex, so step inwards instead
    let steps: Vec<f64> = (0..n)
        .map(|i| if x0[i] + steps[i] > bounds[i].1 { -steps[i] } else { steps[i] })
        .collect();
    let to_x = |t: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (x0[i] + steps[i] * t[i]).clamp(bounds[i].0, bounds[i].1))
            .collect()
    };
    let project = |t: Vec<f64>| -> Vec<f64> {
        let x = to_x(&t);
        (0..n).map(|i| (x[i] - x0[i]) / steps[i]).collect()
    };
    let eval = |t: &[f64]| {
        let v = f(&to_x(t));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = (0..=n)
        .map(|j| {
            let mut t = vec![0.0; n];
            if j > 0 {
                t[j - 1] = 1.0;
            }
            project(t)
        })
        .collect();
    let mut values: Vec<f64> = simplex.iter().map(|t| eval(t)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < options.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|v| v[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + coef * (simplex[n][i] - centroid[i]))
                .collect()
        };

        let reflected = project(along(-1.0));
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = project(along(-2.0));
            let fe = eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = project(along(-0.5));
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = project(along(0.5));
                let fc = eval(&c);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for j in 1..=n {
                    let shrunk: Vec<f64> = (0..n)
                        .map(|i| simplex[0][i] + 0.5 * (simplex[j][i] - simplex[0][i]))
                        .collect();
                    let shrunk = project(shrunk);
                    values[j] = eval(&shrunk);
                    simplex[j] = shrunk;
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty simplex");
    Minimum {
        x: to_x(&simplex[best]),
        value: values[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(
            f,
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &[(f64::NEG_INFINITY, f64::INFINITY); 2],
            NelderMeadOptions {
                max_iterations: 5000,
                tolerance: 1e-10,
            },
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounds_are_respected() {
        let m = minimize(
            |x| (x[0] + 3.0).powi(2),
            &[1.0],
            &[0.5],
            &[(0.0, 10.0)],
            NelderMeadOptions::default(),
        );
        assert_eq!(m.x[0], 0.0);
    }

    #[test]
    fn start_on_upper_bound_keeps_full_dimension() {
        let m = minimize(
            |x| (x[0] - 0.8).powi(2) + (x[1] - 2.0).powi(2),
            &[1.0, 0.0],
            &[0.05, 0.1],
            &[(0.0, 1.0), (f64::NEG_INFINITY, f64::INFINITY)],
            NelderMeadOptions::default(),
        );
        assert!(m.converged);
        assert!((m.x[0] - 0.8).abs() < 1e-8 && (m.x[1] - 2.0).abs() < 1e-8, "{:?}", m.x);
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let m = minimize(
            |x| x[0].powi(2) + x[1].powi(2),
            &[5.0, 5.0],
            &[1.0, 1.0],
            &[(f64::NEG_INFINITY, f64::INFINITY); 2],
            NelderMeadOptions {
                max_iterations: 3,
                tolerance: 1e-12,
            },
        );
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
