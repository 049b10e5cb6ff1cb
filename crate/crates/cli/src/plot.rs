//! Log-log SVG plots of a run directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use plotters::prelude::*;

use crate::report::{PlotSpec, Summary};

type Series = BTreeMap<String, Vec<(f64, f64)>>;

fn load_series(path: &Path, spec: &PlotSpec) -> Result<Series> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let head = rd.headers()?.clone();
    let col = |name: &str| head.iter().position(|h| h == name).with_context(|| format!("{}: no column `{name}`", path.display()));
    let (xi, yi) = (col(&spec.x)?, col(&spec.y)?);
    let gi = spec.group.as_deref().map(col).transpose()?;
    let only = match &spec.only {
        Some((k, v)) => Some((col(k)?, v.clone())),
        None => None,
    };
    let mut out = Series::new();
    for rec in rd.records() {
        let rec = rec?;
        if let Some((k, v)) = &only {
            if rec.get(*k) != Some(v.as_str()) {
                continue;
            }
        }
        let parse = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok());
        let (Some(x), Some(y)) = (parse(xi), parse(yi)) else { continue };
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            continue;
        }
        let g = gi.and_then(|i| rec.get(i)).unwrap_or("").to_string();
        out.entry(g).or_default().push((x, y));
    }
    Ok(out)
}

fn log_range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let pad = ((hi / lo).log10() * 0.08).max(0.05);
    (lo / 10f64.powf(pad), hi * 10f64.powf(pad))
}

fn line_through(x0: f64, y0: f64, slope: f64, xs: (f64, f64)) -> Vec<(f64, f64)> {
    [xs.0, xs.1].iter().map(|&x| (x, y0 * (x / x0).powf(slope))).collect()
}

fn render(check: &str, spec: &PlotSpec, data: &Series) -> Result<String> {
    let xr = log_range(data.values().flatten().map(|p| p.0));
    let yr = log_range(data.values().flatten().map(|p| p.1));
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (720, 520)).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(check, ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(44)
            .y_label_area_size(70)
            .build_cartesian_2d((xr.0..xr.1).log_scale(), (yr.0..yr.1).log_scale())?;
        chart.configure_mesh().x_desc(spec.x.as_str()).y_desc(spec.y.as_str()).draw()?;
        for (i, (group, pts)) in data.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            let tag = if group.is_empty() { String::new() } else { format!("{} = {group}: ", spec.group.as_deref().unwrap_or("")) };
            chart
                .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))?
                .label(format!("{tag}data"))
                .legend(move |(x, y)| Circle::new((x, y), 3, color.filled()));
            let span = (pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.0).fold(0.0, f64::max));
            let gx = (pts.iter().map(|p| p.0.ln()).sum::<f64>() / pts.len() as f64).exp();
            let gy = (pts.iter().map(|p| p.1.ln()).sum::<f64>() / pts.len() as f64).exp();
            if let Ok(fit) = conifold::analysis::fit_decay_span(pts, 0.0) {
                chart
                    .draw_series(LineSeries::new(line_through(gx, gy, fit.slope, span), color.stroke_width(2)))?
                    .label(format!("{tag}fit slope {:.3}", fit.slope))
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
            }
            for r in spec.references.iter().filter(|r| r.group.as_deref().is_none_or(|g| g == group)) {
                let faint = color.mix(0.45);
                chart
                    .draw_series(DashedLineSeries::new(line_through(gx, gy, r.slope, span), 6, 4, faint.stroke_width(2)))?
                    .label(format!("{tag}reference slope {:.3}", r.slope))
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], faint.stroke_width(2)));
            }
        }
        chart.configure_series_labels().background_style(WHITE.mix(0.85)).border_style(BLACK).draw()?;
        root.present()?;
    }
    Ok(svg)
}

/// Write `<check>.svg` for every plottable report in `dir`. Nothing is
/// written unless every plot has data.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = Summary::read(dir)?;
    let mut jobs = Vec::new();
    for rep in &summary.reports {
        let Some(spec) = &rep.plot else { continue };
        let data = load_series(&dir.join(format!("{}.csv", rep.check)), spec)?;
        if data.is_empty() {
            bail!("{}: no plottable rows", rep.check);
        }
        jobs.push((rep.check.clone(), spec.clone(), data));
    }
    if jobs.is_empty() {
        bail!("no plottable data in {}", dir.display());
    }
    let rendered: Vec<(PathBuf, String)> =
        jobs.iter().map(|(check, spec, data)| Ok((dir.join(format!("{check}.svg")), render(check, spec, data)?))).collect::<Result<_>>()?;
    for (path, svg) in &rendered {
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rendered.into_iter().map(|r| r.0).collect())
}
