//! JSON and CSV rendering of command reports.
//!
//! CSV tables start with a header row; trailing summary rows begin with
//! `#` and hold a key and a value.

use csv::WriterBuilder;

use crate::args::Format;
use crate::commands::Report;

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => csv_table(report),
    }
}

/// Shortest round-trip form, scientific outside `[1e-4, 1e6)`.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn csv_table(report: &Report) -> String {
    let mut w = WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let mut row = |fields: &[String]| w.write_record(fields).expect("in-memory write");
    let s = |x: &dyn ToString| x.to_string();
    let summary = |key: &str, value: String| vec![format!("# {key}"), value];

    match report {
        Report::Stats(r) => {
            row(&["pattern", "prob_i", "prob_d", "prob_mixed", "pi", "accept"].map(String::from));
            for e in &r.rows {
                row(&[
                    s(&e.pattern),
                    num(e.prob_i),
                    num(e.prob_d),
                    num(e.prob_mixed),
                    s(&e.pi),
                    s(&e.accept),
                ]);
            }
            row(&summary("interferometer", r.interferometer.clone()));
            row(&summary("overlap", num(r.overlap)));
            row(&summary(
                "acceptance_probability",
                num(r.acceptance_probability),
            ));
            row(&summary("analytic_acceptance", num(r.analytic_acceptance)));
        }
        Report::Verify(r) => {
            row(&["check", "passed", "measured", "tolerance", "detail"].map(String::from));
            for c in &r.checks {
                row(&[
                    c.name.clone(),
                    s(&c.passed),
                    c.measured.map_or_else(String::new, num),
                    num(c.tolerance),
                    c.detail.clone(),
                ]);
            }
            row(&summary("interferometer", r.interferometer.clone()));
            row(&summary("passed", s(&r.passed)));
        }
        Report::Decompose(r) => {
            row(&["layer", "upper_mode", "lower_mode"].map(String::from));
            for l in &r.layers {
                for &(a, b) in &l.pairs {
                    row(&[s(&l.index), s(&a), s(&b)]);
                }
            }
            row(&summary("beam_splitters", s(&r.beam_splitters)));
            row(&summary(
                "expected_beam_splitters",
                s(&r.expected_beam_splitters),
            ));
            row(&summary("residual", num(r.residual)));
        }
        Report::Sample(r) => {
            row(&["shot", "pattern", "accept"].map(String::from));
            for rec in &r.records {
                row(&[s(&rec.shot), s(&rec.pattern), s(&rec.accept)]);
            }
            let m = &r.summary;
            row(&summary("seed", s(&r.seed)));
            row(&summary("accepted", s(&m.accepted)));
            row(&summary("frequency", num(m.frequency)));
            row(&summary("expected", num(m.expected)));
            row(&summary("analytic", num(m.analytic)));
            row(&summary("sigma", num(m.sigma)));
            row(&summary("interval_low", num(m.interval.0)));
            row(&summary("interval_high", num(m.interval.1)));
            row(&summary("within_interval", s(&m.within_interval)));
        }
        Report::Swapsim(r) => {
            row(&["quantity", "value"].map(String::from));
            row(&["circuit_full".into(), num(r.circuit_full)]);
            row(&["circuit_simplified".into(), num(r.circuit_simplified)]);
            if let Some(v) = r.interferometer {
                row(&["interferometer".into(), num(v)]);
            }
            row(&["analytic".into(), num(r.analytic)]);
            row(&["overlap".into(), num(r.overlap)]);
            for d in &r.deltas {
                row(&[
                    format!("delta {} - {}", d.between.0, d.between.1),
                    num(d.delta),
                ]);
            }
            row(&summary("agree", s(&r.agree)));
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
