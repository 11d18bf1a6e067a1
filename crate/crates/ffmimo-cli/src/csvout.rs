//! Tabular output: a flat row schema shared by every subcommand, rendered
//! as CSV or TSV with byte-reproducible formatting.
//!
//! Floats are printed with `{}` (shortest round-trip representation), so a
//! dataset built from the same seed and configuration serializes to
//! identical bytes on every run and thread count. Optional cells render as
//! empty fields rather than placeholder text.

/// Column order of every emitted table.
pub const COLUMNS: [&str; 13] = [
    "figure",
    "p",
    "n_t",
    "n_r",
    "eps_spec",
    "snr",
    "scheme",
    "rate_bits",
    "pe",
    "d_min",
    "trials",
    "stderr",
    "seed",
];

/// One output record. Numeric cells are optional: a record with no
/// computable rate (for example an ensemble class that could not be
/// filled) keeps its row with the cell left empty.
#[derive(Debug, Clone)]
pub struct Row {
    /// Dataset label: a preset name (`fig4`), `custom`, or the subcommand.
    pub figure: String,
    pub p: u64,
    pub n_t: usize,
    pub n_r: usize,
    /// Human-readable noise description: a probability, a `;`-joined
    /// per-antenna list, or a draw law like `U[0.05,0.15)`.
    pub eps_spec: String,
    pub snr: Option<f64>,
    pub scheme: String,
    pub rate_bits: Option<f64>,
    pub pe: Option<f64>,
    /// Minimum distance of the code generated by the channel matrix; an
    /// ensemble mean when the row aggregates many draws.
    pub d_min: Option<f64>,
    /// Monte Carlo trials behind the row; 0 marks an analytic value.
    pub trials: u64,
    pub stderr: Option<f64>,
    pub seed: u64,
}

/// A titled table: comment lines describing provenance, then rows.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    /// Rendered as `# ...` lines above the header.
    pub comments: Vec<String>,
    pub rows: Vec<Row>,
}

fn opt_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

/// Quotes a cell when it contains the delimiter, a quote, or a line break
/// (RFC 4180); anything else passes through unchanged. Noise draw laws
/// like `U[0.05,0.15)` carry a comma and would otherwise shift every
/// column after them.
fn encode_cell(cell: &str, delim: char) -> String {
    if cell.contains(delim) || cell.contains('"') || cell.contains('\n') || cell.contains('\r') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

impl Dataset {
    pub fn push_comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    /// Renders the table with the given field delimiter (`,` or `\t`).
    pub fn to_delimited(&self, delim: char) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&COLUMNS.join(&delim.to_string()));
        out.push('\n');
        for r in &self.rows {
            let cells = [
                r.figure.clone(),
                r.p.to_string(),
                r.n_t.to_string(),
                r.n_r.to_string(),
                r.eps_spec.clone(),
                opt_cell(r.snr),
                r.scheme.clone(),
                opt_cell(r.rate_bits),
                opt_cell(r.pe),
                opt_cell(r.d_min),
                r.trials.to_string(),
                opt_cell(r.stderr),
                r.seed.to_string(),
            ];
            let encoded: Vec<String> = cells.iter().map(|c| encode_cell(c, delim)).collect();
            out.push_str(&encoded.join(&delim.to_string()));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.to_delimited(',')
    }

    pub fn to_tsv(&self) -> String {
        self.to_delimited('\t')
    }
}
