//! Shared CSV formatting.

/// Reals are printed with 12 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.11e}")
}

pub(crate) fn csv_writer<W: std::io::Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}
