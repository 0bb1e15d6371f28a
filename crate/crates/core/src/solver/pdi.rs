//! Primal-dual integral over deterministic work units.
//!
//! The integrand is the clamped relative gap: 1 while no incumbent
//! exists, otherwise `|p - d| / max(|p|, |d|, 1e-9)` capped at 1. The
//! integral therefore lies in `[0, total_work]`.

/// A change of the incumbent or the global dual bound at a work point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundEvent {
    pub work: u64,
    pub primal: Option<f64>,
    pub dual: Option<f64>,
}

fn gap(primal: Option<f64>, dual: Option<f64>) -> f64 {
    match (primal, dual) {
        (Some(p), Some(d)) => {
            let denom = p.abs().max(d.abs()).max(1e-9);
            ((p - d).abs() / denom).clamp(0.0, 1.0)
        }
        _ => 1.0,
    }
}

/// Integrates the gap over `[0, total_work]` given bound-change events
/// ordered by nondecreasing work.
pub fn compute_pdi(events: &[BoundEvent], total_work: u64) -> f64 {
    let mut pdi = 0.0;
    let mut cursor = 0u64;
    let mut current = gap(None, None);
    for e in events {
        let at = e.work.min(total_work);
        if at > cursor {
            pdi += current * (at - cursor) as f64;
            cursor = at;
        }
        current = gap(e.primal, e.dual);
    }
    if total_work > cursor {
        pdi += current * (total_work - cursor) as f64;
    }
    pdi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_at_work_zero_means_zero_pdi() {
        let events = [BoundEvent {
            work: 0,
            primal: Some(5.0),
            dual: Some(5.0),
        }];
        assert_eq!(compute_pdi(&events, 100), 0.0);
    }

    #[test]
    fn no_incumbent_integrates_to_budget() {
        assert_eq!(compute_pdi(&[], 250), 250.0);
        let events = [BoundEvent {
            work: 10,
            primal: None,
            dual: Some(1.0),
        }];
        assert_eq!(compute_pdi(&events, 250), 250.0);
    }

    #[test]
    fn piecewise_segments_sum() {
        // gamma = 1 over [0, 10), then 0.5 over [10, 20).
        let events = [BoundEvent {
            work: 10,
            primal: Some(1.0),
            dual: Some(0.5),
        }];
        assert_eq!(compute_pdi(&events, 20), 15.0);
    }

    #[test]
    fn result_is_bounded_by_work() {
        let events = [
            BoundEvent {
                work: 3,
                primal: Some(-10.0),
                dual: Some(-40.0),
            },
            BoundEvent {
                work: 9,
                primal: Some(-30.0),
                dual: Some(-31.0),
            },
        ];
        let pdi = compute_pdi(&events, 50);
        assert!(pdi >= 0.0 && pdi <= 50.0);
    }
}
