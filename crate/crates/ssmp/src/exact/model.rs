//! Mixed-integer model of the full optimization problem.
//!
//! One binary per (element, slot) pair plus one activation binary per slot,
//! with K = min(M, N) slots. Maximizing the plain sum of all binaries is
//! exactly the solution measure: each active slot contributes 1 and each
//! matched element contributes 1. Amounts enter the tolerance rows as
//! fixed-point units, so the model is integer-exact.

use crate::deadline::SolveError;
use crate::instance::{Instance, Match, Solution};
use crate::subset::Subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

pub struct Constraint {
    pub name: String,
    /// `(coefficient, variable id)` pairs; variables are binary.
    pub terms: Vec<(i64, usize)>,
    pub sense: Sense,
    pub rhs: i64,
}

pub struct MilpModel {
    pub m: usize,
    pub n: usize,
    /// Slot count, min(m, n).
    pub k: usize,
    pub symmetry_breaking: bool,
    pub var_names: Vec<String>,
    /// All-ones objective over every variable, to be maximized.
    pub constraints: Vec<Constraint>,
}

/// Variable layout: `a`-side selection binaries first, then `b`-side, then
/// slot activations. Names are 1-based to read like the math.
impl MilpModel {
    pub fn w_id(&self, i: usize, k: usize) -> usize {
        debug_assert!(i < self.m && k < self.k);
        i * self.k + k
    }

    pub fn v_id(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < self.n && k < self.k);
        self.m * self.k + j * self.k + k
    }

    pub fn m_id(&self, k: usize) -> usize {
        debug_assert!(k < self.k);
        (self.m + self.n) * self.k + k
    }

    pub fn num_vars(&self) -> usize {
        (self.m + self.n + 1) * self.k
    }

    /// Objective value of a 0/1 assignment: the number of set variables.
    pub fn objective_of(&self, assignment: &[u8]) -> i64 {
        assert_eq!(assignment.len(), self.num_vars());
        assignment.iter().map(|&x| x as i64).sum()
    }

    /// Evaluate every constraint row; the first violated row is reported by
    /// name. Independent of how the assignment was produced.
    pub fn check_assignment(&self, assignment: &[u8]) -> Result<(), String> {
        assert_eq!(assignment.len(), self.num_vars());
        if let Some(x) = assignment.iter().find(|&&x| x > 1) {
            return Err(format!("non-binary value {x}"));
        }
        for c in &self.constraints {
            let lhs: i64 = c.terms.iter().map(|&(co, v)| co * assignment[v] as i64).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs,
                Sense::Ge => lhs >= c.rhs,
            };
            if !ok {
                return Err(format!(
                    "constraint {} violated: lhs {} {} rhs {}",
                    c.name,
                    lhs,
                    if c.sense == Sense::Le { "<=" } else { ">=" },
                    c.rhs
                ));
            }
        }
        Ok(())
    }

    /// Read a 0/1 assignment back into a match list, dropping inactive or
    /// empty slots.
    pub fn decode(&self, assignment: &[u8]) -> Solution {
        let mut matches = Vec::new();
        for k in 0..self.k {
            let mut w = Subset::empty(self.m);
            let mut v = Subset::empty(self.n);
            for i in 0..self.m {
                if assignment[self.w_id(i, k)] == 1 {
                    w.insert(i);
                }
            }
            for j in 0..self.n {
                if assignment[self.v_id(j, k)] == 1 {
                    v.insert(j);
                }
            }
            if !w.is_empty() && !v.is_empty() {
                matches.push(Match { w, v });
            }
        }
        Solution { matches }
    }

    /// Serialize in the CPLEX LP dialect.
    pub fn write_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ subset-sum matching, maximize matched elements plus match count\n");
        out.push_str("Maximize\n obj:");
        let names: Vec<&str> = self.var_names.iter().map(|s| s.as_str()).collect();
        let mut col = 5;
        for (idx, name) in names.iter().enumerate() {
            let term = if idx == 0 { format!(" {name}") } else { format!(" + {name}") };
            col = wrap(&mut out, col, &term);
        }
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let mut col = 0;
            col = wrap(&mut out, col, &format!(" {}:", c.name));
            for (pos, &(coeff, var)) in c.terms.iter().enumerate() {
                let sign = if coeff < 0 {
                    " - "
                } else if pos == 0 {
                    " "
                } else {
                    " + "
                };
                let mag = coeff.abs();
                let term = if mag == 1 {
                    format!("{sign}{}", names[var])
                } else {
                    format!("{sign}{mag} {}", names[var])
                };
                col = wrap(&mut out, col, &term);
            }
            let sense = if c.sense == Sense::Le { "<=" } else { ">=" };
            wrap(&mut out, col, &format!(" {sense} {}", c.rhs));
            out.push('\n');
        }
        out.push_str("Binary\n");
        let mut col = 0;
        for name in &names {
            col = wrap(&mut out, col, &format!(" {name}"));
        }
        out.push_str("\nEnd\n");
        out
    }
}

/// Append `term`, breaking the line first when it would pass the classic
/// 255-column LP limit. Returns the new column.
fn wrap(out: &mut String, col: usize, term: &str) -> usize {
    if col + term.len() > 240 {
        out.push('\n');
        out.push_str("  ");
        out.push_str(term);
        2 + term.len()
    } else {
        out.push_str(term);
        col + term.len()
    }
}

pub fn build_model(instance: &Instance, symmetry_breaking: bool) -> MilpModel {
    let (m, n) = (instance.m(), instance.n());
    assert!(m >= 1 && n >= 1, "model needs both sides populated");
    let k = m.min(n);
    let mut model = MilpModel {
        m,
        n,
        k,
        symmetry_breaking,
        var_names: Vec::with_capacity((m + n + 1) * k),
        constraints: Vec::new(),
    };
    for i in 0..m {
        for slot in 0..k {
            model.var_names.push(format!("w_{}_{}", i + 1, slot + 1));
        }
    }
    for j in 0..n {
        for slot in 0..k {
            model.var_names.push(format!("v_{}_{}", j + 1, slot + 1));
        }
    }
    for slot in 0..k {
        model.var_names.push(format!("m_{}", slot + 1));
    }

    let eps = instance.epsilon();
    for slot in 0..k {
        // slot sum difference within tolerance, split into two inequalities
        let mut terms = Vec::with_capacity(m + n);
        for (i, &a) in instance.a().iter().enumerate() {
            terms.push((a, model.w_id(i, slot)));
        }
        for (j, &b) in instance.b().iter().enumerate() {
            terms.push((-b, model.v_id(j, slot)));
        }
        model.constraints.push(Constraint {
            name: format!("tol_hi_{}", slot + 1),
            terms: terms.clone(),
            sense: Sense::Le,
            rhs: eps,
        });
        model.constraints.push(Constraint {
            name: format!("tol_lo_{}", slot + 1),
            terms: terms.iter().map(|&(c, v)| (-c, v)).collect(),
            sense: Sense::Le,
            rhs: eps,
        });
    }
    // each element joins at most one slot
    for i in 0..m {
        model.constraints.push(Constraint {
            name: format!("one_a_{}", i + 1),
            terms: (0..k).map(|slot| (1, model.w_id(i, slot))).collect(),
            sense: Sense::Le,
            rhs: 1,
        });
    }
    for j in 0..n {
        model.constraints.push(Constraint {
            name: format!("one_b_{}", j + 1),
            terms: (0..k).map(|slot| (1, model.v_id(j, slot))).collect(),
            sense: Sense::Le,
            rhs: 1,
        });
    }
    // elements only join active slots
    for slot in 0..k {
        for i in 0..m {
            model.constraints.push(Constraint {
                name: format!("act_a_{}_{}", i + 1, slot + 1),
                terms: vec![(1, model.w_id(i, slot)), (-1, model.m_id(slot))],
                sense: Sense::Le,
                rhs: 0,
            });
        }
        for j in 0..n {
            model.constraints.push(Constraint {
                name: format!("act_b_{}_{}", j + 1, slot + 1),
                terms: vec![(1, model.v_id(j, slot)), (-1, model.m_id(slot))],
                sense: Sense::Le,
                rhs: 0,
            });
        }
    }
    // active slots hold at least one element per side
    for slot in 0..k {
        let mut terms: Vec<(i64, usize)> = (0..m).map(|i| (1, model.w_id(i, slot))).collect();
        terms.push((-1, model.m_id(slot)));
        model.constraints.push(Constraint {
            name: format!("min_a_{}", slot + 1),
            terms,
            sense: Sense::Ge,
            rhs: 0,
        });
        let mut terms: Vec<(i64, usize)> = (0..n).map(|j| (1, model.v_id(j, slot))).collect();
        terms.push((-1, model.m_id(slot)));
        model.constraints.push(Constraint {
            name: format!("min_b_{}", slot + 1),
            terms,
            sense: Sense::Ge,
            rhs: 0,
        });
    }
    if symmetry_breaking {
        // interchangeable slots bloat the search tree; force use in order
        for slot in 0..k.saturating_sub(1) {
            model.constraints.push(Constraint {
                name: format!("sym_{}", slot + 1),
                terms: vec![(1, model.m_id(slot)), (-1, model.m_id(slot + 1))],
                sense: Sense::Ge,
                rhs: 0,
            });
        }
    }
    model
}

/// Complete 0/1 assignment for a known-feasible solution. Matches fill
/// slots largest first so the slot-ordering rows stay satisfied.
pub fn encode_warm_start(model: &MilpModel, s: &Solution) -> Result<Vec<u8>, SolveError> {
    if s.matches.len() > model.k {
        return Err(SolveError::BadWarmStart(format!(
            "{} matches but only {} slots",
            s.matches.len(),
            model.k
        )));
    }
    let mut order: Vec<&Match> = s.matches.iter().collect();
    order.sort_by_key(|m| std::cmp::Reverse(m.w.count() + m.v.count()));
    let mut assignment = vec![0u8; model.num_vars()];
    for (slot, mat) in order.iter().enumerate() {
        assignment[model.m_id(slot)] = 1;
        for i in mat.w.indices() {
            assignment[model.w_id(i, slot)] = 1;
        }
        for j in mat.v.indices() {
            assignment[model.v_id(j, slot)] = 1;
        }
    }
    model.check_assignment(&assignment).map_err(SolveError::BadWarmStart)?;
    Ok(assignment)
}

/// Start-file body: one `name value` line per variable, complete listing.
pub fn write_mst(model: &MilpModel, assignment: &[u8]) -> String {
    assert_eq!(assignment.len(), model.num_vars());
    let mut out = String::new();
    for (name, &x) in model.var_names.iter().zip(assignment) {
        out.push_str(name);
        out.push(' ');
        out.push_str(if x == 1 { "1" } else { "0" });
        out.push('\n');
    }
    out
}

/// Parse a backend's solution listing: an optional `status optimal|feasible`
/// line, then `name value` pairs. Values may be fractional the way MILP
/// solvers print them; anything not near 0 or 1 is an error. Unlisted
/// variables default to 0.
pub fn parse_solution_listing(
    model: &MilpModel,
    text: &str,
) -> Result<(bool, Vec<u8>), SolveError> {
    let mut optimal = false;
    let mut assignment = vec![0u8; model.num_vars()];
    let index: std::collections::HashMap<&str, usize> =
        model.var_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        let rest = parts.next();
        if head == "status" {
            match rest {
                Some("optimal") => optimal = true,
                Some("feasible") => optimal = false,
                other => {
                    return Err(SolveError::Backend(format!(
                        "unknown status {:?}",
                        other.unwrap_or("")
                    )))
                }
            }
            continue;
        }
        let Some(&var) = index.get(head) else {
            return Err(SolveError::Backend(format!("unknown variable {head}")));
        };
        let Some(value) = rest.and_then(|v| v.parse::<f64>().ok()) else {
            return Err(SolveError::Backend(format!("bad value on line {line:?}")));
        };
        let rounded = value.round();
        if (value - rounded).abs() > 1e-4 || !(rounded == 0.0 || rounded == 1.0) {
            return Err(SolveError::Backend(format!("non-binary value {value} for {head}")));
        }
        assignment[var] = rounded as u8;
    }
    Ok((optimal, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    fn inst(a: &[i64], b: &[i64], eps: i64) -> Instance {
        Instance::new(a.to_vec(), b.to_vec(), eps, 0).unwrap()
    }

    #[test]
    fn variable_count_follows_the_size_formula() {
        let a = vec![1i64; 10];
        let b = vec![1i64; 10];
        let model = build_model(&inst(&a, &b, 0), true);
        assert_eq!(model.num_vars(), 210);
        assert_eq!(model.var_names.len(), 210);
    }

    #[test]
    fn empty_assignment_is_feasible_with_zero_objective() {
        let model = build_model(&inst(&[1, 2], &[3], 0), true);
        let assignment = vec![0u8; model.num_vars()];
        model.check_assignment(&assignment).unwrap();
        assert_eq!(model.objective_of(&assignment), 0);
    }

    #[test]
    fn active_empty_slot_violates_the_minimum_rows() {
        let model = build_model(&inst(&[1, 2], &[3], 0), true);
        let mut assignment = vec![0u8; model.num_vars()];
        assignment[model.m_id(0)] = 1;
        let err = model.check_assignment(&assignment).unwrap_err();
        assert!(err.contains("min_a_1"), "{err}");
    }

    #[test]
    fn tolerance_rows_use_exact_units() {
        let model = build_model(&inst(&[5], &[7], 1), true);
        let mut assignment = vec![0u8; model.num_vars()];
        assignment[model.m_id(0)] = 1;
        assignment[model.w_id(0, 0)] = 1;
        assignment[model.v_id(0, 0)] = 1;
        // 5 - 7 = -2 misses eps = 1
        let err = model.check_assignment(&assignment).unwrap_err();
        assert!(err.contains("tol_lo_1"), "{err}");
    }

    #[test]
    fn warm_start_round_trips_and_scores_like_the_measure() {
        // the two-sided solution from the walk-through figure
        let a: Vec<i64> = vec![54];
        let b: Vec<i64> = vec![11, 28, 15];
        let instance = Instance::new(a, b, 1, 1).unwrap();
        let solution = Solution::from_json(
            r#"{"matches": [{"w": [0], "v": [0, 1, 2]}]}"#,
            instance.m(),
            instance.n(),
        )
        .unwrap();
        assert!(instance.check_solution(&solution).is_ok());
        let model = build_model(&instance, true);
        let assignment = encode_warm_start(&model, &solution).unwrap();
        assert_eq!(model.objective_of(&assignment), instance.psi(&solution).unwrap());
        let decoded = model.decode(&assignment);
        assert_eq!(instance.psi(&decoded).unwrap(), 5);
    }

    #[test]
    fn warm_start_rejects_overlapping_matches() {
        let instance = inst(&[5, 5], &[5, 5], 0);
        let solution = Solution::from_json(
            r#"{"matches": [{"w": [0], "v": [0]}, {"w": [0], "v": [1]}]}"#,
            2,
            2,
        )
        .unwrap();
        assert!(matches!(
            encode_warm_start(&build_model(&instance, true), &solution),
            Err(SolveError::BadWarmStart(_))
        ));
    }

    #[test]
    fn warm_start_orders_slots_by_match_size() {
        let instance = inst(&[1, 2, 3], &[1, 2, 3], 0);
        let solution = Solution::from_json(
            r#"{"matches": [{"w": [0], "v": [0]}, {"w": [1, 2], "v": [1, 2]}]}"#,
            3,
            3,
        )
        .unwrap();
        let model = build_model(&instance, true);
        let assignment = encode_warm_start(&model, &solution).unwrap();
        // the 4-element match lands in slot 1, the 2-element match in slot 2
        assert_eq!(assignment[model.w_id(1, 0)], 1);
        assert_eq!(assignment[model.w_id(0, 1)], 1);
    }

    #[test]
    fn lp_text_has_the_expected_shape() {
        let model = build_model(&inst(&[5], &[2, 3], 1), true);
        let lp = model.write_lp();
        assert!(lp.starts_with("\\"));
        for section in ["Maximize", "Subject To", "Binary", "End"] {
            assert!(lp.contains(section), "missing {section}");
        }
        assert!(lp.contains("tol_hi_1:"));
        assert!(lp.contains("<= 1"));
        assert!(lp.lines().all(|l| l.len() <= 255));
    }

    #[test]
    fn lp_lines_wrap_on_wide_models() {
        let a = vec![1_000_000i64; 60];
        let b = vec![1_000_000i64; 60];
        let model = build_model(&inst(&a, &b, 0), true);
        let lp = model.write_lp();
        assert!(lp.lines().all(|l| l.len() <= 255));
    }

    #[test]
    fn solution_listing_round_trips() {
        let model = build_model(&inst(&[5], &[2, 3], 0), true);
        let mut assignment = vec![0u8; model.num_vars()];
        assignment[model.m_id(0)] = 1;
        assignment[model.w_id(0, 0)] = 1;
        assignment[model.v_id(0, 0)] = 1;
        assignment[model.v_id(1, 0)] = 1;
        let text = format!("status optimal\n{}", write_mst(&model, &assignment));
        let (optimal, parsed) = parse_solution_listing(&model, &text).unwrap();
        assert!(optimal);
        assert_eq!(parsed, assignment);
    }

    #[test]
    fn solution_listing_rejects_junk() {
        let model = build_model(&inst(&[5], &[2, 3], 0), true);
        assert!(parse_solution_listing(&model, "q_9_9 1\n").is_err());
        assert!(parse_solution_listing(&model, "w_1_1 0.5\n").is_err());
        assert!(parse_solution_listing(&model, "status hungry\n").is_err());
        let (optimal, parsed) = parse_solution_listing(&model, "w_1_1 0.99999998\n").unwrap();
        assert!(!optimal);
        assert_eq!(parsed[model.w_id(0, 0)], 1);
    }
}
