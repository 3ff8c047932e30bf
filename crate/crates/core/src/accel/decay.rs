//! Decaying stiffness: a per-node multiplier that shrinks each time the
//! node is selected, so settled nodes are picked less often.

/// Per-node decaying stiffness `m` and selection counts `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayState {
    pub m: Vec<f64>,
    pub t: Vec<u32>,
    /// Decay rate `p`.
    pub p: f64,
    /// Stiffness given to already-settled nodes when the area grows.
    pub rested_value: f64,
}

impl DecayState {
    pub fn new(n: usize) -> Self {
        DecayState {
            m: vec![1.0; n],
            t: vec![0; n],
            p: 0.05,
            rested_value: 0.1,
        }
    }
}

/// `z = Δ_v / max Δ`, or 0 when the maximum is 0.
pub fn normalized_change(delta_v: f64, max_delta: f64) -> f64 {
    if max_delta > 0.0 {
        (delta_v / max_delta).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// `m' = clamp(m − z·p^t, 0, 1)` for node `v`, then increments `t_v`.
pub fn update_decaying_stiffness(state: &mut DecayState, v: usize, z: f64) -> f64 {
    let t = state.t[v];
    let m = (state.m[v] - z * state.p.powi(t as i32)).clamp(0.0, 1.0);
    state.m[v] = m;
    state.t[v] = t.saturating_add(1);
    m
}
