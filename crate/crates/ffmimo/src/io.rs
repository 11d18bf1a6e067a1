//! Plain-text channel descriptions.
//!
//! A channel file is line-oriented. Blank lines and lines starting with
//! `#` are ignored. The first meaningful line is a header `rows cols p`,
//! followed by `rows` matrix lines of `cols` entries each, followed by
//! keyword lines:
//!
//! * `eps e1 [e2 ... eN]` — the matrix is a finite-field channel with
//!   symmetric per-antenna noise; one value is broadcast to all antennas.
//! * `snr v` (required) and optionally `seed s` — the matrix is a real
//!   channel observed through the lattice quantizer at that
//!   signal-to-noise ratio.
//!
//! Exactly one of `eps` / `snr` must appear. Finite matrix entries are
//! integers (reduced modulo p); real entries are finite floats. Errors
//! carry the 1-based physical line number they were detected on.

use std::path::Path;

use crate::channel::{FiniteChannel, RealChannel, RealMatrix};
use crate::error::{Error, Result};
use crate::gf::{GfMatrix, PrimeField};

/// A channel parsed from text.
#[derive(Debug, Clone)]
pub enum ParsedChannel {
    Finite(FiniteChannel),
    Real {
        channel: RealChannel,
        /// Simulation seed the file suggested, if any.
        seed: Option<u64>,
    },
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a channel description; see the module docs for the format.
pub fn parse_channel(text: &str) -> Result<ParsedChannel> {
    // Meaningful lines with their physical 1-based numbers.
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let eof_line = text.lines().count() + 1;

    let mut it = lines.into_iter();
    let (header_no, header) = it
        .next()
        .ok_or_else(|| parse_err(eof_line, "empty file: expected a `rows cols p` header"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(parse_err(
            header_no,
            format!("header must be `rows cols p`, got {} tokens", toks.len()),
        ));
    }
    let rows: usize = toks[0]
        .parse()
        .map_err(|_| parse_err(header_no, format!("bad row count `{}`", toks[0])))?;
    let cols: usize = toks[1]
        .parse()
        .map_err(|_| parse_err(header_no, format!("bad column count `{}`", toks[1])))?;
    let p: u64 = toks[2]
        .parse()
        .map_err(|_| parse_err(header_no, format!("bad modulus `{}`", toks[2])))?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(header_no, "matrix dimensions must be positive"));
    }
    let field = PrimeField::new(p).map_err(|e| parse_err(header_no, e.to_string()))?;

    // Matrix body, kept as tokens until we know the channel kind.
    let mut body: Vec<(usize, Vec<String>)> = Vec::with_capacity(rows);
    for r in 0..rows {
        let (no, line) = it
            .next()
            .ok_or_else(|| parse_err(eof_line, format!("expected {rows} matrix rows, got {r}")))?;
        let toks: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if toks.len() != cols {
            return Err(parse_err(
                no,
                format!("expected {cols} entries in this row, got {}", toks.len()),
            ));
        }
        body.push((no, toks));
    }

    // Keyword lines.
    let mut eps: Option<(usize, Vec<f64>)> = None;
    let mut snr: Option<(usize, f64)> = None;
    let mut seed: Option<(usize, u64)> = None;
    for (no, line) in it {
        let mut toks = line.split_whitespace();
        let key = toks.next().expect("meaningful lines are nonempty");
        let rest: Vec<&str> = toks.collect();
        match key {
            "eps" => {
                if eps.is_some() {
                    return Err(parse_err(no, "duplicate `eps` line"));
                }
                if rest.is_empty() {
                    return Err(parse_err(no, "`eps` needs at least one value"));
                }
                let mut vals = Vec::with_capacity(rest.len());
                for t in &rest {
                    let v: f64 = t
                        .parse()
                        .map_err(|_| parse_err(no, format!("bad error probability `{t}`")))?;
                    vals.push(v);
                }
                eps = Some((no, vals));
            }
            "snr" => {
                if snr.is_some() {
                    return Err(parse_err(no, "duplicate `snr` line"));
                }
                if rest.len() != 1 {
                    return Err(parse_err(no, "`snr` needs exactly one value"));
                }
                let v: f64 = rest[0]
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad snr `{}`", rest[0])))?;
                snr = Some((no, v));
            }
            "seed" => {
                if seed.is_some() {
                    return Err(parse_err(no, "duplicate `seed` line"));
                }
                if rest.len() != 1 {
                    return Err(parse_err(no, "`seed` needs exactly one value"));
                }
                let v: u64 = rest[0]
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad seed `{}`", rest[0])))?;
                seed = Some((no, v));
            }
            other => {
                return Err(parse_err(
                    no,
                    format!("unknown keyword `{other}` (expected eps, snr, or seed)"),
                ));
            }
        }
    }

    match (eps, snr) {
        (Some((eps_no, _)), Some((snr_no, _))) => Err(parse_err(
            eps_no.max(snr_no),
            "a channel is either finite (`eps`) or real (`snr`), not both",
        )),
        (None, None) => Err(parse_err(
            eof_line,
            "missing `eps` (finite channel) or `snr` (real channel) line",
        )),
        (Some((eps_no, vals)), None) => {
            if let Some((no, _)) = seed {
                return Err(parse_err(no, "`seed` only applies to real channels"));
            }
            let mut entries = Vec::with_capacity(rows * cols);
            for (no, toks) in &body {
                for t in toks {
                    let v: i64 = t
                        .parse()
                        .map_err(|_| parse_err(*no, format!("bad integer entry `{t}`")))?;
                    entries.push(v);
                }
            }
            let q = GfMatrix::from_flat(field, rows, cols, &entries);
            let vals = if vals.len() == 1 {
                vec![vals[0]; rows]
            } else if vals.len() == rows {
                vals
            } else {
                return Err(parse_err(
                    eps_no,
                    format!(
                        "expected 1 or {rows} error probabilities, got {}",
                        vals.len()
                    ),
                ));
            };
            let fc =
                FiniteChannel::symmetric(q, &vals).map_err(|e| parse_err(eps_no, e.to_string()))?;
            Ok(ParsedChannel::Finite(fc))
        }
        (None, Some((snr_no, snr_v))) => {
            let mut entries = Vec::with_capacity(rows * cols);
            for (no, toks) in &body {
                for t in toks {
                    let v: f64 = t
                        .parse()
                        .map_err(|_| parse_err(*no, format!("bad real entry `{t}`")))?;
                    if !v.is_finite() {
                        return Err(parse_err(*no, format!("entry `{t}` is not finite")));
                    }
                    entries.push(v);
                }
            }
            let h = RealMatrix::from_flat(rows, cols, entries);
            let channel =
                RealChannel::new(h, snr_v, field).map_err(|e| parse_err(snr_no, e.to_string()))?;
            Ok(ParsedChannel::Real {
                channel,
                seed: seed.map(|(_, s)| s),
            })
        }
    }
}

/// Reads and parses a channel file.
pub fn read_channel_file(path: &Path) -> Result<ParsedChannel> {
    let text = std::fs::read_to_string(path)?;
    parse_channel(&text)
}

/// Renders a finite channel in the file format (full eps vector).
pub fn format_finite(fc: &FiniteChannel) -> String {
    let mut out = String::new();
    let q = fc.q();
    out.push_str(&format!("{} {} {}\n", q.rows(), q.cols(), fc.field().p()));
    for r in 0..q.rows() {
        let row: Vec<String> = (0..q.cols())
            .map(|c| q.get(r, c).value().to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    let eps: Vec<String> = fc.eps().iter().map(|e| format!("{e}")).collect();
    out.push_str(&format!("eps {}\n", eps.join(" ")));
    out
}

/// Renders a real channel in the file format.
pub fn format_real(ch: &RealChannel, seed: Option<u64>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} {} {}\n",
        ch.h.rows(),
        ch.h.cols(),
        ch.field.p()
    ));
    for r in 0..ch.h.rows() {
        let row: Vec<String> = ch.h.row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str(&format!("snr {}\n", ch.snr));
    if let Some(s) = seed {
        out.push_str(&format!("seed {s}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_a_finite_channel() {
        let text = "3 2 5\n1 2\n3 0\n4 4\neps 0.1 0.2 0.3\n";
        match parse_channel(text).unwrap() {
            ParsedChannel::Finite(fc) => {
                assert_eq!(fc.field().p(), 5);
                assert_eq!(fc.n_r(), 3);
                assert_eq!(fc.n_t(), 2);
                assert_eq!(fc.q().get(1, 0).value(), 3);
                // eps is re-derived from the noise laws, so compare up to
                // float rounding.
                for (got, want) in fc.eps().iter().zip([0.1, 0.2, 0.3]) {
                    assert!((got - want).abs() < 1e-12);
                }
            }
            other => panic!("expected finite, got {other:?}"),
        }
    }

    #[test]
    fn broadcasts_a_single_eps() {
        let text = "2 1 2\n1\n1\neps 0.15\n";
        match parse_channel(text).unwrap() {
            ParsedChannel::Finite(fc) => {
                assert_eq!(fc.eps().len(), 2);
                for e in fc.eps() {
                    assert!((e - 0.15).abs() < 1e-12);
                }
            }
            other => panic!("expected finite, got {other:?}"),
        }
    }

    #[test]
    fn negative_entries_reduce_modulo_p() {
        let text = "1 1 7\n-1\neps 0.1\n";
        match parse_channel(text).unwrap() {
            ParsedChannel::Finite(fc) => assert_eq!(fc.q().get(0, 0).value(), 6),
            other => panic!("expected finite, got {other:?}"),
        }
    }

    #[test]
    fn parses_a_real_channel_with_seed() {
        let text = "2 2 3\n1.25 -0.5\n0.75 2\nsnr 10\nseed 99\n";
        match parse_channel(text).unwrap() {
            ParsedChannel::Real { channel, seed } => {
                assert_eq!(channel.field.p(), 3);
                assert_eq!(channel.h.get(0, 1), -0.5);
                assert_eq!(channel.snr, 10.0);
                assert_eq!(seed, Some(99));
            }
            other => panic!("expected real, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored_but_counted() {
        let text = "# a channel\n\n2 1 2\n# matrix\n1\n1\n\neps 0.25\n";
        assert!(parse_channel(text).is_ok());
        // Same file with a broken eps on physical line 8.
        let bad = "# a channel\n\n2 1 2\n# matrix\n1\n1\n\neps zero\n";
        assert_eq!(line_of(parse_channel(bad).unwrap_err()), 8);
    }

    #[test]
    fn header_errors_point_at_line_one() {
        assert_eq!(line_of(parse_channel("2 2\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_channel("x 2 2\n1 1\n1 1\n").unwrap_err()), 1);
        // Modulus 4 is not prime.
        assert_eq!(
            line_of(parse_channel("1 1 4\n1\neps 0.1\n").unwrap_err()),
            1
        );
        assert_eq!(
            line_of(parse_channel("0 1 2\n1\neps 0.1\n").unwrap_err()),
            1
        );
    }

    #[test]
    fn row_arity_errors_point_at_the_offending_row() {
        let text = "2 2 2\n1 1\n1\neps 0.1\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 3);
    }

    #[test]
    fn missing_rows_are_reported_at_end_of_file() {
        let text = "3 1 2\n1\n1\n";
        // The parser runs out of lines: the remaining row is also missing,
        // but the `eps`/`snr` classification never happens.
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 4);
    }

    #[test]
    fn bad_entries_are_reported_where_they_sit() {
        let finite = "2 1 2\n1\nx\neps 0.1\n";
        assert_eq!(line_of(parse_channel(finite).unwrap_err()), 3);
        let real = "2 1 2\n1.0\nnan\nsnr 5\n";
        assert_eq!(line_of(parse_channel(real).unwrap_err()), 3);
        // A float in a finite matrix is caught once `eps` classifies it.
        let mixed = "1 1 2\n1.5\neps 0.1\n";
        assert_eq!(line_of(parse_channel(mixed).unwrap_err()), 2);
    }

    #[test]
    fn keyword_validation() {
        // Neither eps nor snr.
        let text = "1 1 2\n1\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 3);
        // Both.
        let text = "1 1 2\n1\neps 0.1\nsnr 3\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 4);
        // Duplicate snr.
        let text = "1 1 2\n1.0\nsnr 3\nsnr 4\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 4);
        // Seed on a finite channel.
        let text = "1 1 2\n1\neps 0.1\nseed 7\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 4);
        // Unknown keyword.
        let text = "1 1 2\n1\nsigma 0.1\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 3);
        // Wrong eps count (2 antennas, 3 values).
        let text = "2 1 2\n1\n1\neps 0.1 0.2 0.3\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 4);
        // Eps out of range.
        let text = "1 1 2\n1\neps 1.5\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 3);
        // Snr out of range.
        let text = "1 1 2\n1.0\nsnr -3\n";
        assert_eq!(line_of(parse_channel(text).unwrap_err()), 3);
    }

    #[test]
    fn finite_channels_round_trip() {
        let text = "3 2 5\n1 2\n3 0\n4 4\neps 0.1 0.2 0.3\n";
        let fc = match parse_channel(text).unwrap() {
            ParsedChannel::Finite(fc) => fc,
            other => panic!("expected finite, got {other:?}"),
        };
        let rendered = format_finite(&fc);
        let again = match parse_channel(&rendered).unwrap() {
            ParsedChannel::Finite(fc) => fc,
            other => panic!("expected finite, got {other:?}"),
        };
        assert_eq!(fc.q(), again.q());
        assert_eq!(fc.eps(), again.eps());
    }

    #[test]
    fn real_channels_round_trip_bit_exactly() {
        let text = "2 2 3\n1.25 -0.5\n0.7500000000000003 2\nsnr 9.5\nseed 4\n";
        let (ch, seed) = match parse_channel(text).unwrap() {
            ParsedChannel::Real { channel, seed } => (channel, seed),
            other => panic!("expected real, got {other:?}"),
        };
        let rendered = format_real(&ch, seed);
        let (again, seed2) = match parse_channel(&rendered).unwrap() {
            ParsedChannel::Real { channel, seed } => (channel, seed),
            other => panic!("expected real, got {other:?}"),
        };
        assert_eq!(seed2, Some(4));
        assert_eq!(ch.snr.to_bits(), again.snr.to_bits());
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(ch.h.get(r, c).to_bits(), again.h.get(r, c).to_bits());
            }
        }
    }

    #[test]
    fn file_reading_reports_io_errors() {
        let err = read_channel_file(Path::new("/nonexistent/channel.txt")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
