use crate::graphs::CommGraph;

/// Mean of the values received in one round, the process's own included.
pub fn averaging_step(received: &[f64]) -> f64 {
    assert!(
        !received.is_empty(),
        "a process always receives its own value"
    );
    received.iter().sum::<f64>() / received.len() as f64
}

/// One synchronous round of averaging over `g`.
pub fn averaging_round(values: &[f64], g: &CommGraph) -> Vec<f64> {
    (0..values.len())
        .map(|a| {
            let received: Vec<f64> = g.in_set(a).iter().map(|b| values[b]).collect();
            averaging_step(&received)
        })
        .collect()
}

/// Values after rounds `0..=pattern.len()`.
pub fn averaging_series(inputs: &[f64], pattern: &[CommGraph]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(pattern.len() + 1);
    out.push(inputs.to_vec());
    for g in pattern {
        let next = averaging_round(out.last().expect("nonempty"), g);
        out.push(next);
    }
    out
}

/// Spread between the largest and smallest value.
pub fn gap(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::LinkGraph;

    #[test]
    fn examples() {
        let both = averaging_round(&[0.0, 1.0], &LinkGraph::Both.graph());
        assert_eq!(both, vec![0.5, 0.5]);
        assert_eq!(gap(&both), 0.0);
        let qp = averaging_round(&[0.0, 1.0], &LinkGraph::Qp.graph());
        assert_eq!(qp, vec![0.5, 1.0]);
        let none = averaging_round(&[0.0, 1.0], &LinkGraph::None.graph());
        assert_eq!(none, vec![0.0, 1.0]);
    }

    #[test]
    fn series_length() {
        let s = averaging_series(&[0.0, 1.0], &vec![LinkGraph::Pq.graph(); 3]);
        assert_eq!(s.len(), 4);
        assert_eq!(gap(&s[3]), 0.125);
    }
}
