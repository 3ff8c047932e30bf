//! Distance models from hop counts and from signal-strength estimates.

use super::fspl::{fspl_distance, FsplParams};
use crate::error::Result;
use crate::graph::{all_pairs_graph_distance, build_distance_model, DistanceModel, Topology};

/// Estimated length in meters of every edge, in edge order.
pub fn fspl_edge_lengths(topology: &Topology, fspl: &FsplParams) -> Vec<f64> {
    topology
        .edges()
        .iter()
        .map(|e| fspl_distance(e.rssi_dbm, fspl))
        .collect()
}

/// Model over shortest paths of FSPL-estimated edge lengths.
pub fn kk_ss_model(topology: &Topology, fspl: &FsplParams, l0: f64, k_scale: f64) -> Result<DistanceModel> {
    let w = fspl_edge_lengths(topology, fspl);
    let d = all_pairs_graph_distance(topology, Some(&w))?;
    build_distance_model(d, l0, k_scale)
}

/// Model over hop counts.
pub fn hop_model(topology: &Topology, l0: f64, k_scale: f64) -> Result<DistanceModel> {
    build_distance_model(all_pairs_graph_distance(topology, None)?, l0, k_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn path3(r1: f64, r2: f64) -> Topology {
        let e = |u, v, rssi_dbm| Edge { u, v, rssi_dbm };
        Topology::new(3, vec![e(0, 1, r1), e(1, 2, r2)], None, None).unwrap()
    }

    #[test]
    fn path_lengths_add() {
        let f = FsplParams::default();
        let t = path3(f.rssi_at(3.0), f.rssi_at(4.0));
        let m = kk_ss_model(&t, &f, 600.0, 1.0).unwrap();
        assert!((m.d.get(0, 2) - 7.0).abs() < 1e-9);
    }

    #[test]
    fn equal_rssi_matches_hop_lengths() {
        let f = FsplParams::default();
        let t = path3(-55.0, -55.0);
        let ss = kk_ss_model(&t, &f, 600.0, 1.0).unwrap();
        let hop = hop_model(&t, 600.0, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((ss.l.get(i, j) - hop.l.get(i, j)).abs() < 1e-9);
            }
        }
    }
}
