//! CSV and SVG emission for sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use super::sweep::{theoretical_bpsk_ber, BerPoint};
use crate::error::{Error, Result};

/// Exact CSV header of every results file.
pub const CSV_HEADER: &str = "detector,beta,tau,ebno_db,bits,errors,ber,mean_nodes,ms_per_block";

/// Writes `#`-prefixed metadata lines followed by the CSV table.
pub fn write_csv<W: Write>(rows: &[BerPoint], metadata: &[(String, String)], mut out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to write".into()));
    }
    let ctx = |e: std::io::Error| Error::io("<csv>", e);
    for (k, v) in metadata {
        writeln!(out, "# {k}: {v}").map_err(ctx)?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::io("<csv>", e))?;
    }
    w.flush().map_err(ctx)?;
    Ok(())
}

pub fn emit_csv(rows: &[BerPoint], metadata: &[(String, String)], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to write".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, metadata, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { message, .. } => Error::Io {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Reads rows written by [`write_csv`], skipping metadata lines.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<BerPoint>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers().map_err(|e| Error::io("<csv>", e))?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header `{header}`")));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::io("<csv>", e))).collect()
}

pub fn parse_csv(path: &Path) -> Result<Vec<BerPoint>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// BER-versus-Eb/N0 chart with a log BER axis, one line per
/// `(detector, β, τ)` and the no-ISI BPSK reference dashed.
pub fn render_svg(rows: &[BerPoint]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to plot".into()));
    }
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        let key = format!("{} β={} τ={}", r.detector, r.beta, r.tau);
        series.entry(key).or_default().push((r.ebno_db, r.ber));
    }
    let x_min = rows.iter().map(|r| r.ebno_db).fold(f64::INFINITY, f64::min);
    let mut x_max = rows.iter().map(|r| r.ebno_db).fold(f64::NEG_INFINITY, f64::max);
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let floor = rows
        .iter()
        .filter(|r| r.ber > 0.0)
        .map(|r| r.ber)
        .fold(1e-1, f64::min);
    let y_min = floor.log10().floor().min(-1.0);
    let y_max = 0.0;
    let px = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let py = |b: f64| {
        let l = b.max(10f64.powf(y_min)).log10();
        MARGIN + (y_max - l) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for decade in (y_min as i32)..=(y_max as i32) {
        let y = py(10f64.powi(decade));
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{decade}</text>"##,
            WIDTH - MARGIN,
            MARGIN - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let ticks = 5;
    for t in 0..=ticks {
        let x = x_min + (x_max - x_min) * t as f64 / ticks as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x:.1}</text>"#,
            px(x),
            HEIGHT - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Eb/N0 (dB)</text><text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">BER</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    let reference: Vec<String> = (0..=50)
        .map(|i| {
            let x = x_min + (x_max - x_min) * i as f64 / 50.0;
            format!("{:.1},{:.1}", px(x), py(theoretical_bpsk_ber(x)))
        })
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-dasharray="5,4"/>"#,
        reference.join(" ")
    );

    for (idx, (name, mut pts)) in series.into_iter().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = COLORS[idx % COLORS.len()];
        let line: Vec<String> = pts.iter().map(|(x, b)| format!("{:.1},{:.1}", px(*x), py(*b))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
        for (x, b) in &pts {
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#, px(*x), py(*b));
        }
        let ly = MARGIN + 14.0 + 14.0 * idx as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 6.0,
            name
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(rows: &[BerPoint], path: &Path) -> Result<()> {
    let svg = render_svg(rows)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::DetectorKind;

    fn rows() -> Vec<BerPoint> {
        vec![
            BerPoint {
                detector: DetectorKind::Sdse,
                beta: 0.3,
                tau: 0.7,
                ebno_db: 6.0,
                bits: 64_000,
                errors: 201,
                ber: 201.0 / 64_000.0,
                mean_nodes: 130.25,
                ms_per_block: None,
            },
            BerPoint {
                detector: DetectorKind::Sd,
                beta: 0.5,
                tau: 0.6,
                ebno_db: 7.5,
                bits: 1_280,
                errors: 0,
                ber: 0.0,
                mean_nodes: 1.0 / 3.0,
                ms_per_block: Some(0.0123),
            },
        ]
    }

    #[test]
    fn header_and_round_trip() {
        let mut buf = Vec::new();
        let meta = vec![("seed".to_string(), "7".to_string())];
        write_csv(&rows(), &meta, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# seed: 7"));
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(text.contains("sdse,0.3,0.7,6.0,64000,201,"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows());
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(write_csv(&[], &[], Vec::new()).is_err());
        assert!(render_svg(&[]).is_err());
    }

    #[test]
    fn svg_has_series() {
        let svg = render_svg(&rows()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 3);
    }

    #[test]
    fn io_errors_carry_path() {
        let path = Path::new("/nonexistent-dir/out.csv");
        match emit_csv(&rows(), &[], path) {
            Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
            other => panic!("unexpected {other:?}"),
        }
    }
}
