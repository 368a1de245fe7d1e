use serde::{Deserialize, Serialize};

use super::UnitSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcKind {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    On(u32),
    Off(u32),
    Source,
    Sink,
}

/// One arc of the schedule graph.
///
/// An ON arc `OFF_h → ON_r` keeps the unit on over `[h, r]`. An OFF arc
/// `ON_h → OFF_r` keeps it off over `[h + 1, r − 1]`; arcs out of the source
/// or into the sink cover the corresponding horizon ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub kind: ArcKind,
    pub from: Node,
    pub to: Node,
    /// Inclusive period range covered (`first > last` when empty).
    pub first: u32,
    pub last: u32,
}

impl Arc {
    pub fn len(&self) -> u32 {
        (self.last + 1).saturating_sub(self.first)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// ON arc entered from an OFF node: the unit starts up at `first`.
    pub fn starts_up(&self) -> bool {
        self.kind == ArcKind::On && matches!(self.from, Node::Off(_))
    }

    /// OFF arc leading to a start-up (its head is an OFF node).
    pub fn precedes_startup(&self) -> bool {
        self.kind == ArcKind::Off && matches!(self.to, Node::Off(_))
    }

    /// ON arc followed by a shut-down inside the horizon.
    pub fn shuts_down(&self, n: u32) -> bool {
        self.kind == ArcKind::On && self.last < n
    }
}

/// Schedule graph of one unit over `n` periods: nodes `ON_j`, `OFF_j`,
/// source and sink; every source-to-sink path is a schedule meeting the
/// minimum up and down times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpGraph {
    pub n: u32,
    pub arcs: Vec<Arc>,
}

impl DpGraph {
    pub fn num_nodes(&self) -> usize {
        2 * self.n as usize + 2
    }

    /// Row index of a node in the incidence matrix: `ON_1..ON_n`,
    /// `OFF_1..OFF_n`, source, sink.
    pub fn node_index(&self, node: Node) -> usize {
        let n = self.n as usize;
        match node {
            Node::On(j) => j as usize - 1,
            Node::Off(j) => n + j as usize - 1,
            Node::Source => 2 * n,
            Node::Sink => 2 * n + 1,
        }
    }

    /// Signed node-arc incidence matrix: `−1` at the tail, `+1` at the head.
    pub fn incidence(&self) -> Vec<Vec<i64>> {
        let mut e = vec![vec![0i64; self.arcs.len()]; self.num_nodes()];
        for (a, arc) in self.arcs.iter().enumerate() {
            e[self.node_index(arc.from)][a] -= 1;
            e[self.node_index(arc.to)][a] += 1;
        }
        e
    }

    /// Flow demand: `−1` at the source, `+1` at the sink.
    pub fn delta(&self) -> Vec<i64> {
        let mut d = vec![0; self.num_nodes()];
        d[self.node_index(Node::Source)] = -1;
        d[self.node_index(Node::Sink)] = 1;
        d
    }

    pub fn on_arcs(&self) -> impl Iterator<Item = (usize, &Arc)> {
        self.arcs.iter().enumerate().filter(|(_, a)| a.kind == ArcKind::On)
    }
}

/// Builds the schedule graph of `unit` over `n` periods.
///
/// ON arcs ending at `n` and OFF arcs ending at the sink are exempt from the
/// minimum up/down times. A unit that starts on keeps running for its
/// residual up-time (clipped to the horizon); a unit that starts off stays
/// off for its residual down-time. Arcs on no source-to-sink path are dropped.
pub fn build_dp_graph(unit: &UnitSpec, n: u32) -> Result<DpGraph> {
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must have at least one period".into()));
    }
    unit.check()?;
    let (up, down) = (unit.min_up, unit.min_down);
    let mut arcs = Vec::new();
    let on = |first: u32, last: u32, from: Node| Arc { kind: ArcKind::On, from, to: Node::On(last), first, last };

    if unit.initial_state > 0 {
        let k = unit.initial_state as u32;
        let residual = up.saturating_sub(k).clamp(1, n);
        for r in residual..=n {
            arcs.push(on(1, r, Node::Source));
        }
        if k >= up {
            for r in (down + 1)..=n {
                arcs.push(Arc { kind: ArcKind::Off, from: Node::Source, to: Node::Off(r), first: 1, last: r - 1 });
            }
            arcs.push(Arc { kind: ArcKind::Off, from: Node::Source, to: Node::Sink, first: 1, last: n });
        }
    } else {
        let k = unit.initial_state.unsigned_abs();
        let residual = down.saturating_sub(k);
        for h in (residual + 1)..=n {
            arcs.push(Arc { kind: ArcKind::Off, from: Node::Source, to: Node::Off(h), first: 1, last: h - 1 });
        }
        arcs.push(Arc { kind: ArcKind::Off, from: Node::Source, to: Node::Sink, first: 1, last: n });
    }
    for h in 1..=n {
        for r in h..=n {
            if r == n || r - h + 1 >= up {
                arcs.push(on(h, r, Node::Off(h)));
            }
        }
    }
    for h in 1..=n {
        for r in (h + 1)..=n {
            if r - h - 1 >= down {
                arcs.push(Arc { kind: ArcKind::Off, from: Node::On(h), to: Node::Off(r), first: h + 1, last: r - 1 });
            }
        }
        arcs.push(Arc { kind: ArcKind::Off, from: Node::On(h), to: Node::Sink, first: h + 1, last: n });
    }

    let g = DpGraph { n, arcs };
    let nodes = g.num_nodes();
    let mut fwd = vec![false; nodes];
    fwd[g.node_index(Node::Source)] = true;
    let mut bwd = vec![false; nodes];
    bwd[g.node_index(Node::Sink)] = true;
    // arcs always point forward in time, so a few sweeps settle reachability
    for _ in 0..nodes {
        let mut changed = false;
        for a in &g.arcs {
            let (f, t) = (g.node_index(a.from), g.node_index(a.to));
            if fwd[f] && !fwd[t] {
                fwd[t] = true;
                changed = true;
            }
            if bwd[t] && !bwd[f] {
                bwd[f] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let arcs: Vec<Arc> = g
        .arcs
        .iter()
        .copied()
        .filter(|a| fwd[g.node_index(a.from)] && bwd[g.node_index(a.to)])
        .collect();
    if arcs.is_empty() || !fwd[g.node_index(Node::Sink)] {
        return Err(Error::NoValidSchedule(format!("initial state {} over {n} periods", unit.initial_state)));
    }
    Ok(DpGraph { n, arcs })
}

/// Follows the selected arcs from the source and returns the on/off state of
/// every period. Fails unless the selection is exactly one source-to-sink path.
pub fn decode_path(g: &DpGraph, y: &[i64]) -> Result<Vec<bool>> {
    if y.len() != g.arcs.len() || y.iter().any(|&v| v != 0 && v != 1) {
        return Err(Error::InvalidArgument("selection must be one 0/1 entry per arc".into()));
    }
    let mut state = vec![false; g.n as usize];
    let mut at = Node::Source;
    let mut used = 0;
    while at != Node::Sink {
        let mut out = g.arcs.iter().enumerate().filter(|&(a, arc)| y[a] == 1 && arc.from == at);
        let (_, arc) = out.next().ok_or_else(|| Error::InvalidArgument(format!("path stops at {at:?}")))?;
        if out.next().is_some() {
            return Err(Error::InvalidArgument(format!("path branches at {at:?}")));
        }
        if arc.kind == ArcKind::On {
            for j in arc.first..=arc.last {
                state[j as usize - 1] = true;
            }
        }
        at = arc.to;
        used += 1;
        if used > g.arcs.len() {
            return Err(Error::InvalidArgument("selection contains a cycle".into()));
        }
    }
    if used != y.iter().filter(|&&v| v == 1).count() {
        return Err(Error::InvalidArgument("selection has arcs off the path".into()));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(min_up: u32, min_down: u32, initial_state: i32) -> UnitSpec {
        UnitSpec { min_up, min_down, initial_state, ..UnitSpec::example() }
    }

    fn on_spans(g: &DpGraph) -> Vec<(u32, u32)> {
        g.on_arcs().map(|(_, a)| (a.first, a.last)).collect()
    }

    #[test]
    fn spans_with_min_up_two() {
        let g = build_dp_graph(&unit(2, 1, -5), 3).unwrap();
        assert_eq!(on_spans(&g), vec![(1, 2), (1, 3), (2, 3), (3, 3)]);
        assert_eq!(g.num_nodes(), 8);
    }

    #[test]
    fn single_period() {
        let g = build_dp_graph(&unit(1, 1, -1), 1).unwrap();
        assert_eq!(on_spans(&g), vec![(1, 1)]);
    }

    #[test]
    fn incidence_columns_are_signed_pairs() {
        let g = build_dp_graph(&unit(2, 2, 3), 5).unwrap();
        for col in 0..g.arcs.len() {
            let entries: Vec<i64> = g.incidence().iter().map(|r| r[col]).filter(|&v| v != 0).collect();
            assert_eq!(entries.iter().sum::<i64>(), 0);
            assert_eq!(entries.len(), 2);
        }
    }

    #[test]
    fn residual_up_time_is_kept() {
        // on for 1 period with min_up 3: must stay on through period 2
        let g = build_dp_graph(&unit(3, 1, 1), 4).unwrap();
        let from_source: Vec<_> = g.arcs.iter().filter(|a| a.from == Node::Source).collect();
        assert!(from_source.iter().all(|a| a.kind == ArcKind::On && a.last >= 2));
    }

    #[test]
    fn zero_initial_state_rejected() {
        assert!(build_dp_graph(&unit(1, 1, 0), 3).is_err());
    }
}
