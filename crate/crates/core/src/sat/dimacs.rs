use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{Assignment, Cnf, Lit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: missing or malformed `p cnf` header")]
    Header(usize),
    #[error("line {line}: bad literal `{token}`")]
    Literal { line: usize, token: String },
    #[error("literal {lit} exceeds declared variable count {vars}")]
    VarOutOfRange { lit: i32, vars: u32 },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
}

/// Standard DIMACS: `p cnf V C` header, one zero-terminated clause per line.
pub fn emit_dimacs(cnf: &Cnf) -> Vec<u8> {
    let mut out = String::with_capacity(16 + cnf.clauses().len() * 12);
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.clauses().len());
    for clause in cnf.clauses() {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out.into_bytes()
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or(DimacsError::Header(n + 1))?);
            continue;
        }
        let (vars, _) = header.ok_or(DimacsError::Header(n + 1))?;
        for token in line.split_whitespace() {
            let value: i32 = token.parse().map_err(|_| DimacsError::Literal {
                line: n + 1,
                token: token.into(),
            })?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if value.unsigned_abs() > vars {
                    return Err(DimacsError::VarOutOfRange { lit: value, vars });
                }
                current.push(Lit::from_dimacs(value));
            }
        }
    }
    let (vars, declared) = header.ok_or(DimacsError::Header(0))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    Ok(Cnf::from_clauses(vars, clauses))
}

/// Solver answer in the competition output format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat(Vec<Lit>),
    Unsat,
    Unknown,
}

/// Reads `s ...` and `v ...` lines of a solver's standard output.
pub fn parse_solver_output(stdout: &str) -> Result<Option<SolverAnswer>, String> {
    let mut status = None;
    let mut lits = Vec::new();
    for line in stdout.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => 10,
                "UNSATISFIABLE" => 20,
                "UNKNOWN" => 0,
                other => return Err(format!("unrecognized status line `s {other}`")),
            });
        } else if let Some(rest) = line.strip_prefix('v') {
            for token in rest.split_whitespace() {
                let value: i32 = token
                    .parse()
                    .map_err(|_| format!("bad value token `{token}`"))?;
                if value != 0 {
                    lits.push(Lit::from_dimacs(value));
                }
            }
        }
    }
    Ok(status.map(|s| match s {
        10 => SolverAnswer::Sat(lits),
        20 => SolverAnswer::Unsat,
        _ => SolverAnswer::Unknown,
    }))
}

/// Competition-format output for a model or an UNSAT answer.
pub fn format_answer(result: Option<&Assignment>) -> String {
    match result {
        None => "s UNSATISFIABLE\n".to_string(),
        Some(model) => {
            let mut out = String::from("s SATISFIABLE\n");
            let mut line = String::from("v");
            for var in 1..=model.num_vars() {
                let lit = if model.value(var) { var as i64 } else { -(var as i64) };
                let token = format!(" {lit}");
                if line.len() + token.len() > 78 {
                    out.push_str(&line);
                    out.push('\n');
                    line = String::from("v");
                }
                line.push_str(&token);
            }
            line.push_str(" 0\n");
            out.push_str(&line);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn emit_examples() {
        assert_eq!(emit_dimacs(&Cnf::new()), b"p cnf 0 0\n");
        let cnf = Cnf::from_clauses(2, vec![vec![Lit::from_dimacs(1), Lit::from_dimacs(-2)]]);
        assert_eq!(emit_dimacs(&cnf), b"p cnf 2 1\n1 -2 0\n");
        assert_eq!(emit_dimacs(&cnf), emit_dimacs(&cnf.clone()));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_dimacs("1 2 0\n"), Err(DimacsError::Header(1)));
        assert_eq!(
            parse_dimacs("p cnf 1 1\n1 2 0\n"),
            Err(DimacsError::VarOutOfRange { lit: 2, vars: 1 })
        );
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 2 0\n"),
            Err(DimacsError::ClauseCount {
                declared: 2,
                found: 1
            })
        );
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 x 0\n"),
            Err(DimacsError::Literal { line: 2, .. })
        ));
    }

    #[test]
    fn parse_comments_and_multiline_clauses() {
        let cnf = parse_dimacs("c hello\np cnf 3 2\n1 -2\n 3 0 -1 0\n").unwrap();
        assert_eq!(cnf.num_vars(), 3);
        assert_eq!(cnf.clauses().len(), 2);
        assert_eq!(cnf.clauses()[0].len(), 3);
    }

    #[test]
    fn solver_output() {
        let out = "c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n";
        assert_eq!(
            parse_solver_output(out).unwrap(),
            Some(SolverAnswer::Sat(vec![
                Lit::from_dimacs(1),
                Lit::from_dimacs(-2),
                Lit::from_dimacs(3)
            ]))
        );
        assert_eq!(
            parse_solver_output("s UNSATISFIABLE\n").unwrap(),
            Some(SolverAnswer::Unsat)
        );
        assert_eq!(parse_solver_output("nothing").unwrap(), None);
        assert!(parse_solver_output("s MAYBE\n").is_err());
    }

    #[test]
    fn answer_format_roundtrip() {
        let mut a = Assignment::new(40);
        for v in (1..=40).step_by(3) {
            a.set(v, true);
        }
        let text = format_answer(Some(&a));
        assert!(text.lines().all(|l| l.len() <= 80));
        match parse_solver_output(&text).unwrap() {
            Some(SolverAnswer::Sat(lits)) => assert_eq!(Assignment::from_lits(40, lits), a),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn emit_parse_roundtrip(clauses in proptest::collection::vec(
            proptest::collection::vec((1i32..12, any::<bool>()), 0..5), 0..20)) {
            let clauses: Vec<Vec<Lit>> = clauses
                .into_iter()
                .map(|c| c.into_iter().map(|(v, s)| Lit::from_dimacs(if s { v } else { -v })).collect())
                .filter(|c: &Vec<Lit>| !c.is_empty())
                .collect();
            let cnf = Cnf::from_clauses(11, clauses);
            let bytes = emit_dimacs(&cnf);
            let back = parse_dimacs(std::str::from_utf8(&bytes).unwrap()).unwrap();
            prop_assert_eq!(back, cnf);
        }
    }
}
