//! Sweep output: CSV tables and a static SVG rendering of them.
//!
//! The CSV is the source of truth; the plot draws the rows it is given and
//! never recomputes physics. Both emitters format floats with the shortest
//! round-trip representation, so identical sweeps produce byte-identical
//! files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{SweepParam, SweepRow};
use crate::error::{Error, Result};

/// Render sweep rows as CSV text.
///
/// Columns: `ell,d_min,d_rayleigh,resolved,margin`, then one column per
/// non-ell sweep axis in declaration order. Failed cells carry `NaN`
/// quantities and `resolved = false`.
pub fn render_csv(rows: &[SweepRow]) -> Result<String> {
    let first = rows
        .first()
        .ok_or_else(|| Error::domain("cannot render an empty sweep".to_string()))?;
    let extra: Vec<SweepParam> = first
        .axis_values
        .iter()
        .map(|&(p, _)| p)
        .filter(|&p| p != SweepParam::Ell)
        .collect();

    let mut out = String::new();
    out.push_str("ell,d_min,d_rayleigh,resolved,margin");
    for p in &extra {
        out.push(',');
        out.push_str(p.name());
    }
    out.push('\n');

    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            row.ell, row.d_min, row.d_rayleigh, row.resolved, row.margin
        );
        for &p in &extra {
            let value = row
                .axis_values
                .iter()
                .find(|&&(q, _)| q == p)
                .map(|&(_, v)| v)
                .ok_or_else(|| {
                    Error::domain(format!(
                        "row is missing a value for sweep axis {}",
                        p.name()
                    ))
                })?;
            let _ = write!(out, ",{value}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Write [`render_csv`] output to a file.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    fs::write(path, render_csv(rows)?)?;
    Ok(())
}

const PLOT_WIDTH: f64 = 960.0;
const PLOT_HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 250.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

const SERIES_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
    "#e377c2",
];

fn series_label(key: &[(SweepParam, f64)]) -> String {
    if key.is_empty() {
        return "d_min".to_string();
    }
    key.iter()
        .map(|&(p, v)| format!("{}={}", p.name(), v))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Render sweep rows as a static log-log SVG plot of d_min against ell.
///
/// Requires an ell sweep axis. Rows sharing the same values on every other
/// axis form one series; the region below the diffraction benchmark (where
/// a separation counts as resolved) is shaded. Failed cells are skipped.
pub fn render_plot(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::domain("cannot plot an empty sweep".to_string()));
    }
    if !rows[0].axis_values.iter().any(|&(p, _)| p == SweepParam::Ell) {
        return Err(Error::domain(
            "plotting requires an ell sweep axis".to_string(),
        ));
    }

    // group into series by the non-ell axis values, first-seen order
    let mut series: Vec<(Vec<(SweepParam, f64)>, Vec<(f64, f64)>)> = Vec::new();
    let mut benchmark: Vec<(f64, f64)> = Vec::new();
    for row in rows {
        if row.error.is_some() || !row.d_min.is_finite() || row.ell <= 0.0 {
            continue;
        }
        let key: Vec<(SweepParam, f64)> = row
            .axis_values
            .iter()
            .copied()
            .filter(|&(p, _)| p != SweepParam::Ell)
            .collect();
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((row.ell, row.d_min)),
            None => series.push((key, vec![(row.ell, row.d_min)])),
        }
        if row.d_rayleigh.is_finite()
            && !benchmark.iter().any(|&(x, _)| x == row.ell)
        {
            benchmark.push((row.ell, row.d_rayleigh));
        }
    }
    if series.is_empty() {
        return Err(Error::domain(
            "no plottable rows (every cell failed)".to_string(),
        ));
    }
    benchmark.sort_by(|a, b| a.0.total_cmp(&b.0));

    // data ranges in log10 space, padded out to whole decades on y
    let mut lx = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ly = (f64::INFINITY, f64::NEG_INFINITY);
    let cover = |x: f64, y: f64, lx: &mut (f64, f64), ly: &mut (f64, f64)| {
        if x > 0.0 && y > 0.0 {
            lx.0 = lx.0.min(x.log10());
            lx.1 = lx.1.max(x.log10());
            ly.0 = ly.0.min(y.log10());
            ly.1 = ly.1.max(y.log10());
        }
    };
    for (_, pts) in &series {
        for &(x, y) in pts {
            cover(x, y, &mut lx, &mut ly);
        }
    }
    for &(x, y) in &benchmark {
        cover(x, y, &mut lx, &mut ly);
    }
    if !(lx.0.is_finite() && lx.1 > lx.0 && ly.0.is_finite()) {
        return Err(Error::domain(
            "plot needs positive data spanning more than one ell value".to_string(),
        ));
    }
    let ly = (ly.0.floor(), ly.1.ceil().max(ly.0.floor() + 1.0));

    let pw = PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x.log10() - lx.0) / (lx.1 - lx.0) * pw;
    let py = |y: f64| MARGIN_TOP + ph - (y.log10() - ly.0) / (ly.1 - ly.0) * ph;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" \
         viewBox=\"0 0 {PLOT_WIDTH} {PLOT_HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{MARGIN_LEFT}\" y=\"28\" font-size=\"16\" fill=\"#222222\">minimum resolvable separation vs propagation distance</text>\n"
    );

    // shaded region: everything below the diffraction benchmark curve
    if benchmark.len() >= 2 {
        let mut pts = String::new();
        for &(x, y) in &benchmark {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y.max(10f64.powf(ly.0))));
        }
        let _ = write!(
            pts,
            "{:.2},{:.2} {:.2},{:.2}",
            px(benchmark.last().unwrap().0),
            MARGIN_TOP + ph,
            px(benchmark[0].0),
            MARGIN_TOP + ph
        );
        let _ = write!(
            svg,
            "<polygon class=\"super-resolution-region\" points=\"{pts}\" fill=\"#fff3c2\" fill-opacity=\"0.6\" stroke=\"none\"/>\n"
        );
    }

    // decade gridlines and tick labels
    let mut e = lx.0.ceil() as i64;
    while e as f64 <= lx.1 {
        let x = px(10f64.powi(e as i32));
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>\n",
            MARGIN_TOP + ph
        );
        let _ = write!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#333333\">1e{e}</text>\n",
            MARGIN_TOP + ph + 20.0
        );
        e += 1;
    }
    let mut e = ly.0 as i64;
    while e as f64 <= ly.1 {
        let y = py(10f64.powi(e as i32));
        let _ = write!(
            svg,
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n",
            MARGIN_LEFT + pw
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#333333\">1e{e}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
        e += 1;
    }

    // frame and axis titles
    let _ = write!(
        svg,
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#333333\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#222222\">ell (m)</text>\n",
        MARGIN_LEFT + pw / 2.0,
        MARGIN_TOP + ph + 45.0
    );
    let _ = write!(
        svg,
        "<text x=\"22\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#222222\" transform=\"rotate(-90 22 {:.2})\">d_min (m)</text>\n",
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0
    );

    // diffraction benchmark, dashed
    if benchmark.len() >= 2 {
        let mut pts = String::new();
        for &(x, y) in &benchmark {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = write!(
            svg,
            "<polyline class=\"rayleigh-limit\" points=\"{}\" fill=\"none\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"7 4\"/>\n",
            pts.trim_end()
        );
    }

    // one polyline per series
    for (i, (_, pts)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let mut path = String::new();
        for &(x, y) in pts {
            let _ = write!(path, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = write!(
            svg,
            "<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            path.trim_end()
        );
    }

    // legend
    let lx0 = MARGIN_LEFT + pw + 18.0;
    let mut ly0 = MARGIN_TOP + 10.0;
    for (i, (key, _)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let _ = write!(
            svg,
            "<line x1=\"{lx0}\" y1=\"{ly0}\" x2=\"{:.2}\" y2=\"{ly0}\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            lx0 + 26.0
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#222222\">{}</text>\n",
            lx0 + 32.0,
            ly0 + 4.0,
            series_label(key)
        );
        ly0 += 20.0;
    }
    let _ = write!(
        svg,
        "<line x1=\"{lx0}\" y1=\"{ly0}\" x2=\"{:.2}\" y2=\"{ly0}\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"7 4\"/>\n",
        lx0 + 26.0
    );
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#222222\">d_rayleigh</text>\n",
        lx0 + 32.0,
        ly0 + 4.0
    );
    ly0 += 20.0;
    let _ = write!(
        svg,
        "<rect x=\"{lx0}\" y=\"{:.2}\" width=\"26\" height=\"12\" fill=\"#fff3c2\" fill-opacity=\"0.6\" stroke=\"#cccccc\"/>\n",
        ly0 - 6.0
    );
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#222222\">super-resolution region</text>\n",
        lx0 + 32.0,
        ly0 + 4.0
    );

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Write [`render_plot`] output to a file.
pub fn emit_plot(rows: &[SweepRow], path: &Path) -> Result<()> {
    fs::write(path, render_plot(rows)?)?;
    Ok(())
}
