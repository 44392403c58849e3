//! Capped water-filling of one user's power budget over its selected bands.

/// Inputs for one user. `effective_gains[j] = |h_ii|^2 / (I_j + N0 B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFillProblem {
    pub effective_gains: Vec<f64>,
    pub p_total: f64,
    pub p_caps: Vec<f64>,
}

impl WaterFillProblem {
    /// Same cap on every band.
    pub fn uniform_cap(effective_gains: Vec<f64>, p_total: f64, cap: f64) -> Self {
        let n = effective_gains.len();
        WaterFillProblem {
            effective_gains,
            p_total,
            p_caps: vec![cap; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterFillSolution {
    pub powers: Vec<f64>,
    /// Water level `mu`; `+inf` when every cap binds.
    pub level: f64,
}

const BISECTION_ITERS: usize = 200;

fn fill(level: f64, inv: &[f64], caps: &[f64], out: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for ((o, &floor), &cap) in out.iter_mut().zip(inv).zip(caps) {
        *o = (level - floor).clamp(0.0, cap);
        total += *o;
    }
    total
}

/// Powers `P_j = clamp(mu - 1/g_j, 0, cap_j)` with `sum P_j = min(p_total, sum caps)`.
pub fn water_fill(problem: &WaterFillProblem) -> Vec<f64> {
    water_fill_solution(problem).powers
}

/// As [`water_fill`], also reporting the water level.
pub fn water_fill_solution(problem: &WaterFillProblem) -> WaterFillSolution {
    let n = problem.effective_gains.len();
    assert_eq!(n, problem.p_caps.len(), "one cap per band");
    if n == 0 {
        return WaterFillSolution {
            powers: Vec::new(),
            level: 0.0,
        };
    }
    let caps = &problem.p_caps;
    let cap_sum: f64 = caps.iter().sum();
    if cap_sum <= problem.p_total {
        return WaterFillSolution {
            powers: caps.clone(),
            level: f64::INFINITY,
        };
    }
    let inv: Vec<f64> = problem
        .effective_gains
        .iter()
        .map(|&g| if g > 0.0 { 1.0 / g } else { f64::INFINITY })
        .collect();
    let max_finite = inv.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if max_finite == f64::NEG_INFINITY {
        // no usable band
        return WaterFillSolution {
            powers: vec![0.0; n],
            level: 0.0,
        };
    }
    let target = problem.p_total;
    let mut powers = vec![0.0; n];
    let mut lo = 0.0;
    let mut hi = max_finite + target;
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fill(mid, &inv, caps, &mut powers) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // `lo` never overshoots the budget
    fill(lo, &inv, caps, &mut powers);
    WaterFillSolution { powers, level: lo }
}

/// How a user splits its budget over the bands it selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerRule {
    /// Capped water-filling on the effective gains.
    #[default]
    WaterFill,
    /// `p_total / |bands|` on each band, capped.
    UniformSplit,
}

impl PowerRule {
    pub fn allocate(self, effective_gains: &[f64], p_total: f64, cap: f64) -> Vec<f64> {
        match self {
            PowerRule::WaterFill => water_fill(&WaterFillProblem::uniform_cap(
                effective_gains.to_vec(),
                p_total,
                cap,
            )),
            PowerRule::UniformSplit => {
                let n = effective_gains.len();
                vec![(p_total / n.max(1) as f64).min(cap); n]
            }
        }
    }
}
