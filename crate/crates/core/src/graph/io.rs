//! Line-oriented topology files.
//!
//! ```text
//! TOPO <n> <m>
//! NODE <id> <x> <y>        # optional, all n or none
//! EDGE <u> <v> <rssi_dbm>  # exactly m
//! BOUND <id>               # optional ground-truth boundary flags
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Edge, Topology};
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Section {
    Header,
    Nodes,
    Edges,
    Bounds,
}

pub fn read_topology(path: impl AsRef<Path>) -> Result<Topology> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_topology(&text, path)
}

pub fn write_topology(topology: &Topology, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_topology(topology))?;
    Ok(())
}

pub fn format_topology(t: &Topology) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "TOPO {} {}", t.node_count(), t.edge_count());
    if let Some(pos) = t.true_positions() {
        for (id, p) in pos.iter().enumerate() {
            let _ = writeln!(out, "NODE {id} {} {}", p.x, p.y);
        }
    }
    for e in t.edges() {
        let _ = writeln!(out, "EDGE {} {} {}", e.u, e.v, e.rssi_dbm);
    }
    if let Some(flags) = t.boundary_truth() {
        for (id, _) in flags.iter().enumerate().filter(|(_, &b)| b) {
            let _ = writeln!(out, "BOUND {id}");
        }
    }
    out
}

/// Parses topology text; `origin` only labels error messages.
pub fn parse_topology(text: &str, origin: &Path) -> Result<Topology> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };

    let mut section = Section::Header;
    let mut n = 0usize;
    let mut m = 0usize;
    let mut positions: Vec<Option<Point>> = Vec::new();
    let mut npos = 0usize;
    let mut edges = Vec::new();
    let mut bounds: Option<Vec<bool>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let node_id = |tok: &str| -> Result<usize> {
            let id: usize = tok
                .parse()
                .map_err(|_| err(lineno, format!("bad node id {tok:?}")))?;
            if id >= n {
                return Err(err(lineno, format!("unknown node id {id}")));
            }
            Ok(id)
        };
        let real = |tok: &str| -> Result<f64> {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("bad number {tok:?}")))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("non-finite number {tok:?}")));
            }
            Ok(v)
        };
        let arity = |want: usize| -> Result<()> {
            if toks.len() != want {
                return Err(err(
                    lineno,
                    format!("{} expects {} fields, got {}", toks[0], want - 1, toks.len() - 1),
                ));
            }
            Ok(())
        };
        let mut enter = |next: Section| -> Result<()> {
            if next < section {
                return Err(err(lineno, format!("{} line out of order", toks[0])));
            }
            section = next;
            Ok(())
        };

        match toks[0] {
            "TOPO" => {
                if section != Section::Header || n != 0 {
                    return Err(err(lineno, "duplicate TOPO header".into()));
                }
                arity(3)?;
                n = toks[1]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad node count {:?}", toks[1])))?;
                m = toks[2]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad edge count {:?}", toks[2])))?;
                if n == 0 {
                    return Err(err(lineno, "node count must be positive".into()));
                }
                positions = vec![None; n];
                section = Section::Nodes;
            }
            _ if n == 0 => return Err(err(lineno, "expected TOPO header".into())),
            "NODE" => {
                enter(Section::Nodes)?;
                arity(4)?;
                let id = node_id(toks[1])?;
                if positions[id].is_some() {
                    return Err(err(lineno, format!("duplicate NODE {id}")));
                }
                positions[id] = Some(Point::new(real(toks[2])?, real(toks[3])?));
                npos += 1;
            }
            "EDGE" => {
                enter(Section::Edges)?;
                arity(4)?;
                let (u, v) = (node_id(toks[1])?, node_id(toks[2])?);
                edges.push(Edge {
                    u,
                    v,
                    rssi_dbm: real(toks[3])?,
                });
            }
            "BOUND" => {
                enter(Section::Bounds)?;
                arity(2)?;
                let id = node_id(toks[1])?;
                bounds.get_or_insert_with(|| vec![false; n])[id] = true;
            }
            other => return Err(err(lineno, format!("unknown record {other:?}"))),
        }
    }

    let last = text.lines().count();
    if n == 0 {
        return Err(err(last.max(1), "missing TOPO header".into()));
    }
    if edges.len() != m {
        return Err(err(last, format!("header declares {m} edges, found {}", edges.len())));
    }
    let true_positions = match npos {
        0 => None,
        k if k == n => Some(positions.into_iter().map(Option::unwrap).collect()),
        k => return Err(err(last, format!("NODE lines cover {k} of {n} nodes"))),
    };
    Topology::new(n, edges, true_positions, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Topology> {
        parse_topology(text, Path::new("test.topo"))
    }

    #[test]
    fn minimal_file_without_optional_sections() {
        let t = parse("TOPO 3 2\nEDGE 0 1 -40.5\nEDGE 1 2 -61\n").unwrap();
        assert_eq!(t.node_count(), 3);
        assert!(t.true_positions().is_none());
        assert!(t.boundary_truth().is_none());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let t = parse("# header\nTOPO 2 1 # two nodes\n\nEDGE 0 1 -40\n").unwrap();
        assert_eq!(t.edge_count(), 1);
    }

    #[test]
    fn unknown_node_id_is_named_with_line_number() {
        let e = parse("TOPO 3 1\nEDGE 0 9 -40\n").unwrap_err().to_string();
        assert!(e.contains("unknown node id 9"), "{e}");
        assert!(e.contains(":2:"), "{e}");
    }

    #[test]
    fn duplicate_edge_is_rejected() {
        let e = parse("TOPO 2 2\nEDGE 0 1 -40\nEDGE 1 0 -40\n").unwrap_err();
        assert!(e.to_string().contains("duplicate edge"));
    }

    #[test]
    fn disconnected_file_is_rejected() {
        let e = parse("TOPO 3 1\nEDGE 0 1 -40\n").unwrap_err();
        assert!(matches!(e, Error::Disconnected { .. }));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let e = parse("TOPO 2 1\nEDGE 0 1\n").unwrap_err().to_string();
        assert!(e.contains(":2:"), "{e}");
        let e = parse("TOPO 2 1\nEDGE 0 1 abc\n").unwrap_err().to_string();
        assert!(e.contains("bad number"), "{e}");
    }

    #[test]
    fn partial_node_section_is_rejected() {
        let e = parse("TOPO 2 1\nNODE 0 1 1\nEDGE 0 1 -40\n").unwrap_err();
        assert!(e.to_string().contains("cover 1 of 2"));
    }

    #[test]
    fn out_of_order_sections_are_rejected() {
        let e = parse("TOPO 2 1\nEDGE 0 1 -40\nNODE 0 1 1\nNODE 1 2 2\n").unwrap_err();
        assert!(e.to_string().contains("out of order"));
    }

    #[test]
    fn full_file_round_trips() {
        let text = "TOPO 3 2\nNODE 0 0.1 0.2\nNODE 1 0.0000001 3\nNODE 2 -4.25 5\nEDGE 0 1 -40.123456789\nEDGE 2 1 -70\nBOUND 0\nBOUND 2\n";
        let t = parse(text).unwrap();
        assert_eq!(format_topology(&t), text);
        assert_eq!(parse(&format_topology(&t)).unwrap(), t);
        assert_eq!(t.boundary_truth().unwrap(), &[true, false, true]);
    }
}
