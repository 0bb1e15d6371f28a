//! MPS reading and writing.
//!
//! The reader accepts free-format files and tolerates fixed-format ones
//! (both tokenize the same way for files without embedded spaces in
//! names). RANGES rows are split into an explicit inequality pair so
//! the in-memory model never carries ranged rows. A missing ENDATA is
//! tolerated. Maximization problems (OBJSENSE MAX) are normalized to
//! minimization by negating the objective.

use std::collections::HashMap;

use super::{InstanceError, MipInstance, RowSense, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Done,
}

struct ColumnBuild {
    name: String,
    kind: VarKind,
    lower: f64,
    upper: f64,
    lower_set: bool,
    upper_set: bool,
    entries: Vec<(usize, f64)>, // (row, coef) for constraint rows
    obj: f64,
}

/// Parses an MPS document into a minimization-form [`MipInstance`].
pub fn parse_mps(text: &str) -> Result<MipInstance, InstanceError> {
    let malformed = |line: usize, reason: &str| InstanceError::MalformedFile {
        line,
        reason: reason.to_string(),
    };

    let mut section = Section::Start;
    let mut name = String::new();
    let mut maximize = false;

    // Constraint rows in declaration order; the first N row is the objective.
    let mut obj_row: Option<String> = None;
    let mut free_rows: Vec<String> = Vec::new();
    let mut row_names: Vec<String> = Vec::new();
    let mut row_sense: Vec<RowSense> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();

    let mut cols: Vec<ColumnBuild> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut integer_mode = false;

    let mut rhs: Vec<f64> = Vec::new();
    let mut obj_rhs: Option<f64> = None;
    let mut ranges: Vec<(usize, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        let tokens: Vec<&str> = raw.split_whitespace().collect();

        if !indented {
            let keyword = tokens[0].to_ascii_uppercase();
            section = match keyword.as_str() {
                "NAME" => {
                    if let Some(tok) = tokens.get(1) {
                        name = (*tok).to_string();
                    }
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(tok) = tokens.get(1) {
                        maximize = parse_objsense(tok, lineno)?;
                        Section::Name
                    } else {
                        Section::ObjSense
                    }
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::Done,
                // OBJSENSE bodies are sometimes written unindented.
                "MAX" | "MAXIMIZE" | "MIN" | "MINIMIZE" if section == Section::ObjSense => {
                    maximize = parse_objsense(&keyword, lineno)?;
                    Section::Name
                }
                other => return Err(malformed(lineno, &format!("unknown section '{other}'"))),
            };
            continue;
        }

        match section {
            Section::ObjSense => {
                maximize = parse_objsense(tokens[0], lineno)?;
                section = Section::Name;
            }
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(malformed(lineno, "ROWS line needs a sense and a name"));
                }
                let rname = tokens[1].to_string();
                let sense = match tokens[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(rname.clone());
                        } else {
                            free_rows.push(rname.clone());
                        }
                        continue;
                    }
                    "L" => RowSense::Le,
                    "G" => RowSense::Ge,
                    "E" => RowSense::Eq,
                    s => return Err(malformed(lineno, &format!("unknown row sense '{s}'"))),
                };
                if row_index.contains_key(&rname)
                    || obj_row.as_deref() == Some(rname.as_str())
                    || free_rows.iter().any(|f| *f == rname)
                {
                    return Err(malformed(lineno, &format!("duplicate row name '{rname}'")));
                }
                row_index.insert(rname.clone(), row_names.len());
                row_names.push(rname);
                row_sense.push(sense);
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1].trim_matches('\'') == "MARKER" {
                    match tokens[2].trim_matches('\'') {
                        "INTORG" => integer_mode = true,
                        "INTEND" => integer_mode = false,
                        m => return Err(malformed(lineno, &format!("unknown marker '{m}'"))),
                    }
                    continue;
                }
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(malformed(lineno, "COLUMNS line needs name/row/value groups"));
                }
                let cname = tokens[0];
                let ci = *col_index.entry(cname.to_string()).or_insert_with(|| {
                    cols.push(ColumnBuild {
                        name: cname.to_string(),
                        kind: if integer_mode {
                            VarKind::Integer
                        } else {
                            VarKind::Continuous
                        },
                        lower: 0.0,
                        upper: f64::INFINITY,
                        lower_set: false,
                        upper_set: false,
                        entries: Vec::new(),
                        obj: 0.0,
                    });
                    cols.len() - 1
                });
                for pair in tokens[1..].chunks(2) {
                    let rname = pair[0];
                    let value = parse_number(pair[1], lineno)?;
                    if obj_row.as_deref() == Some(rname) {
                        if cols[ci].obj != 0.0 {
                            return Err(malformed(
                                lineno,
                                &format!("duplicate objective coefficient for '{cname}'"),
                            ));
                        }
                        cols[ci].obj = value;
                    } else if let Some(&ri) = row_index.get(rname) {
                        if cols[ci].entries.iter().any(|&(r, _)| r == ri) {
                            return Err(malformed(
                                lineno,
                                &format!("duplicate coefficient ({rname}, {cname})"),
                            ));
                        }
                        if value != 0.0 {
                            cols[ci].entries.push((ri, value));
                        }
                    } else if free_rows.iter().any(|f| f == rname) {
                        // Secondary free rows are ignored.
                    } else {
                        return Err(malformed(lineno, &format!("unknown row '{rname}'")));
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(malformed(lineno, "RHS line needs set/row/value groups"));
                }
                rhs.resize(row_names.len(), 0.0);
                for pair in tokens[1..].chunks(2) {
                    let rname = pair[0];
                    let value = parse_number(pair[1], lineno)?;
                    if obj_row.as_deref() == Some(rname) {
                        obj_rhs = Some(value);
                    } else if let Some(&ri) = row_index.get(rname) {
                        rhs[ri] = value;
                    } else if !free_rows.iter().any(|f| f == rname) {
                        return Err(malformed(lineno, &format!("unknown row '{rname}'")));
                    }
                }
            }
            Section::Ranges => {
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(malformed(lineno, "RANGES line needs set/row/value groups"));
                }
                for pair in tokens[1..].chunks(2) {
                    let rname = pair[0];
                    let value = parse_number(pair[1], lineno)?;
                    let ri = *row_index
                        .get(rname)
                        .ok_or_else(|| malformed(lineno, &format!("unknown row '{rname}'")))?;
                    ranges.push((ri, value));
                }
            }
            Section::Bounds => {
                let btype = tokens[0].to_ascii_uppercase();
                let needs_value = matches!(btype.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
                let min_len = if needs_value { 4 } else { 3 };
                if tokens.len() < min_len {
                    return Err(malformed(lineno, "BOUNDS line too short"));
                }
                let cname = tokens[2];
                let ci = *col_index
                    .get(cname)
                    .ok_or_else(|| malformed(lineno, &format!("unknown column '{cname}'")))?;
                let col = &mut cols[ci];
                let value = if needs_value {
                    parse_number(tokens[3], lineno)?
                } else {
                    0.0
                };
                match btype.as_str() {
                    "UP" => {
                        col.upper = value;
                        col.upper_set = true;
                        // Classic quirk: a negative upper bound on a column
                        // whose lower bound was never touched frees the
                        // lower bound.
                        if value < 0.0 && !col.lower_set {
                            col.lower = f64::NEG_INFINITY;
                        }
                    }
                    "LO" => {
                        col.lower = value;
                        col.lower_set = true;
                    }
                    "FX" => {
                        col.lower = value;
                        col.upper = value;
                        col.lower_set = true;
                        col.upper_set = true;
                    }
                    "FR" => {
                        col.lower = f64::NEG_INFINITY;
                        col.upper = f64::INFINITY;
                        col.lower_set = true;
                        col.upper_set = true;
                    }
                    "MI" => {
                        col.lower = f64::NEG_INFINITY;
                        col.lower_set = true;
                    }
                    "PL" => {
                        col.upper = f64::INFINITY;
                        col.upper_set = true;
                    }
                    "BV" => {
                        col.kind = VarKind::Binary;
                        col.lower = 0.0;
                        col.upper = 1.0;
                        col.lower_set = true;
                        col.upper_set = true;
                    }
                    "LI" => {
                        col.kind = VarKind::Integer;
                        col.lower = value;
                        col.lower_set = true;
                    }
                    "UI" => {
                        col.kind = VarKind::Integer;
                        col.upper = value;
                        col.upper_set = true;
                    }
                    b => return Err(malformed(lineno, &format!("unknown bound type '{b}'"))),
                }
            }
            Section::Done => {
                return Err(malformed(lineno, "data after ENDATA"));
            }
            Section::Start | Section::Name => {
                return Err(malformed(lineno, "data line outside any section"));
            }
        }
    }

    if row_names.is_empty() || cols.is_empty() {
        return Err(InstanceError::EmptyProblem(
            "an MPS file needs at least one constraint row and one column".into(),
        ));
    }
    rhs.resize(row_names.len(), 0.0);

    // Integer columns confined to [0, 1] are binary.
    for col in &mut cols {
        if col.kind == VarKind::Integer && col.lower >= 0.0 && col.upper <= 1.0 {
            col.kind = VarKind::Binary;
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); row_names.len()];
    for (ci, col) in cols.iter().enumerate() {
        for &(ri, v) in &col.entries {
            rows[ri].push((ci, v));
        }
    }
    for row in &mut rows {
        row.sort_by_key(|&(j, _)| j);
    }

    let sign = if maximize { -1.0 } else { 1.0 };
    let mut inst = MipInstance {
        name: if name.is_empty() { "unnamed".into() } else { name },
        rows,
        row_sense,
        rhs,
        objective: cols.iter().map(|c| sign * c.obj).collect(),
        // The RHS entry of the objective row is the negated constant.
        objective_offset: sign * obj_rhs.map_or(0.0, |v| -v),
        lower: cols.iter().map(|c| c.lower).collect(),
        upper: cols.iter().map(|c| c.upper).collect(),
        integrality: cols.iter().map(|c| c.kind).collect(),
    };
    apply_ranges(&mut inst, &ranges);
    Ok(inst)
}

fn parse_objsense(token: &str, line: usize) -> Result<bool, InstanceError> {
    match token.to_ascii_uppercase().as_str() {
        "MAX" | "MAXIMIZE" => Ok(true),
        "MIN" | "MINIMIZE" => Ok(false),
        other => Err(InstanceError::MalformedFile {
            line,
            reason: format!("unknown objective sense '{other}'"),
        }),
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64, InstanceError> {
    token.parse::<f64>().map_err(|_| InstanceError::MalformedFile {
        line,
        reason: format!("'{token}' is not a number"),
    })
}

/// Replaces each ranged row by an explicit inequality pair. The original
/// row keeps its position; the partner row is appended at the end.
fn apply_ranges(inst: &mut MipInstance, ranges: &[(usize, f64)]) {
    for &(ri, r) in ranges {
        if r == 0.0 {
            continue;
        }
        let b = inst.rhs[ri];
        let (lo, hi) = match inst.row_sense[ri] {
            RowSense::Le => (b - r.abs(), b),
            RowSense::Ge => (b, b + r.abs()),
            RowSense::Eq => {
                if r > 0.0 {
                    (b, b + r)
                } else {
                    (b + r, b)
                }
            }
        };
        inst.rows.push(inst.rows[ri].clone());
        match inst.row_sense[ri] {
            RowSense::Le => {
                // keep a'x <= hi, add a'x >= lo
                inst.rhs[ri] = hi;
                inst.row_sense.push(RowSense::Ge);
                inst.rhs.push(lo);
            }
            RowSense::Ge | RowSense::Eq => {
                inst.row_sense[ri] = RowSense::Ge;
                inst.rhs[ri] = lo;
                inst.row_sense.push(RowSense::Le);
                inst.rhs.push(hi);
            }
        }
    }
}

/// Formats a number with 12 significant digits.
fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e12 {
        format!("{v:.1}")
    } else {
        format!("{v:.11e}")
    }
}

/// Writes a free-format MPS document. Row and column names are
/// positional (`R1`, `C1`, ...); the parser round-trips the result to a
/// field-identical instance.
pub fn write_mps(inst: &MipInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME {}\n", inst.name));
    out.push_str("ROWS\n N OBJ\n");
    for (i, sense) in inst.row_sense.iter().enumerate() {
        let s = match sense {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        out.push_str(&format!(" {s} R{}\n", i + 1));
    }
    out.push_str("COLUMNS\n");
    let columns = inst.columns();
    let mut integer_mode = false;
    for j in 0..inst.n_cols() {
        let want_int = inst.integrality[j].is_integral();
        if want_int != integer_mode {
            let marker = if want_int { "INTORG" } else { "INTEND" };
            out.push_str(&format!(" MK 'MARKER' '{marker}'\n"));
            integer_mode = want_int;
        }
        if inst.objective[j] != 0.0 {
            out.push_str(&format!(" C{} OBJ {}\n", j + 1, fmt_num(inst.objective[j])));
        }
        for &(i, v) in &columns[j] {
            out.push_str(&format!(" C{} R{} {}\n", j + 1, i + 1, fmt_num(v)));
        }
        if inst.objective[j] == 0.0 && columns[j].is_empty() {
            // Keep empty columns visible so the reader re-creates them.
            out.push_str(&format!(" C{} OBJ 0.0\n", j + 1));
        }
    }
    if integer_mode {
        out.push_str(" MK 'MARKER' 'INTEND'\n");
    }
    out.push_str("RHS\n");
    for (i, b) in inst.rhs.iter().enumerate() {
        if *b != 0.0 {
            out.push_str(&format!(" RHS R{} {}\n", i + 1, fmt_num(*b)));
        }
    }
    if inst.objective_offset != 0.0 {
        out.push_str(&format!(" RHS OBJ {}\n", fmt_num(-inst.objective_offset)));
    }
    out.push_str("BOUNDS\n");
    for j in 0..inst.n_cols() {
        let (l, u) = (inst.lower[j], inst.upper[j]);
        let name = format!("C{}", j + 1);
        if inst.integrality[j] == VarKind::Binary && l == 0.0 && u == 1.0 {
            out.push_str(&format!(" BV BND {name}\n"));
            continue;
        }
        if l == u {
            out.push_str(&format!(" FX BND {name} {}\n", fmt_num(l)));
            continue;
        }
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            out.push_str(&format!(" FR BND {name}\n"));
            continue;
        }
        if l == f64::NEG_INFINITY {
            out.push_str(&format!(" MI BND {name}\n"));
        } else if l != 0.0 {
            out.push_str(&format!(" LO BND {name} {}\n", fmt_num(l)));
        }
        if u != f64::INFINITY {
            out.push_str(&format!(" UP BND {name} {}\n", fmt_num(u)));
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceError;

    const KNAPSACK: &str = "\
NAME tiny
OBJSENSE
 MAX
ROWS
 N obj
 L cap
COLUMNS
 MK 'MARKER' 'INTORG'
 x obj 3.0 cap 1.0
 y obj 2.0 cap 1.0
 MK 'MARKER' 'INTEND'
RHS
 RHS cap 1.0
BOUNDS
 BV BND x
 BV BND y
ENDATA
";

    #[test]
    fn parses_and_normalizes_max_knapsack() {
        let inst = parse_mps(KNAPSACK).unwrap();
        assert_eq!(inst.n_rows(), 1);
        assert_eq!(inst.n_cols(), 2);
        assert_eq!(inst.objective, vec![-3.0, -2.0]);
        assert_eq!(inst.row_sense, vec![RowSense::Le]);
        assert_eq!(inst.rhs, vec![1.0]);
        assert_eq!(inst.integrality, vec![VarKind::Binary, VarKind::Binary]);
        inst.validate().unwrap();
    }

    #[test]
    fn tolerates_missing_endata() {
        let text = KNAPSACK.replace("ENDATA\n", "");
        let inst = parse_mps(&text).unwrap();
        assert_eq!(inst.n_cols(), 2);
    }

    #[test]
    fn unknown_row_in_columns_is_malformed() {
        let text = KNAPSACK.replace(" x obj 3.0 cap 1.0", " x obj 3.0 ghost 1.0");
        match parse_mps(&text) {
            Err(InstanceError::MalformedFile { reason, .. }) => {
                assert!(reason.contains("ghost"))
            }
            other => panic!("expected MalformedFile, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_row_name_is_malformed() {
        let text = KNAPSACK.replace(" L cap\n", " L cap\n L cap\n");
        assert!(matches!(
            parse_mps(&text),
            Err(InstanceError::MalformedFile { .. })
        ));
    }

    #[test]
    fn no_rows_is_empty_problem() {
        let text = "NAME x\nROWS\n N obj\nCOLUMNS\n c obj 1.0\nENDATA\n";
        assert!(matches!(
            parse_mps(text),
            Err(InstanceError::EmptyProblem(_))
        ));
    }

    #[test]
    fn ranges_split_into_row_pairs() {
        let text = "\
NAME r
ROWS
 L up
 G low
 E exact
COLUMNS
 x up 1.0 low 1.0
 x exact 1.0
RHS
 RHS up 10.0 low 2.0
 RHS exact 5.0
RANGES
 RNG up 4.0 low 3.0
 RNG exact 2.0
ENDATA
";
        let inst = parse_mps(text).unwrap();
        assert_eq!(inst.n_rows(), 6);
        // LE row keeps its rhs and gains a >= partner.
        assert_eq!(inst.row_sense[0], RowSense::Le);
        assert_eq!(inst.rhs[0], 10.0);
        assert_eq!(inst.row_sense[3], RowSense::Ge);
        assert_eq!(inst.rhs[3], 6.0);
        // GE row becomes [2, 5].
        assert_eq!((inst.row_sense[1], inst.rhs[1]), (RowSense::Ge, 2.0));
        assert_eq!((inst.row_sense[4], inst.rhs[4]), (RowSense::Le, 5.0));
        // EQ row with positive range becomes [5, 7].
        assert_eq!((inst.row_sense[2], inst.rhs[2]), (RowSense::Ge, 5.0));
        assert_eq!((inst.row_sense[5], inst.rhs[5]), (RowSense::Le, 7.0));
    }

    #[test]
    fn objective_rhs_becomes_offset() {
        let text = KNAPSACK.replace(" RHS cap 1.0", " RHS cap 1.0 obj -2.5");
        let inst = parse_mps(&text).unwrap();
        // MAX sense: offset 2.5 is negated along with the objective.
        assert_eq!(inst.objective_offset, -2.5);
    }

    #[test]
    fn round_trip_is_field_identical() {
        let inst = parse_mps(KNAPSACK).unwrap();
        let text = write_mps(&inst);
        let again = parse_mps(&text).unwrap();
        assert_eq!(inst, again);
    }
}
