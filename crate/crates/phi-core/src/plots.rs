//! Optional static SVG renderings of the bundle's headline figures.
//! The plot-data CSVs remain the canonical outputs; these are a
//! convenience for quick inspection.

use crate::error::{Error, Result};
use crate::phi::Tier;
use crate::pipeline::ReportBundle;
use plotters::prelude::*;
use std::path::Path;

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Io(std::io::Error::other(format!("plot rendering: {e}")))
}

fn tier_colour(tier: Tier) -> RGBColor {
    match tier {
        Tier::High => RED,
        Tier::Moderate => RGBColor(230, 140, 0),
        Tier::Low => BLUE,
    }
}

pub fn write_plots(bundle: &ReportBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    score_distribution(bundle, &dir.join("phi_distribution.svg"))?;
    lorenz_curve(bundle, &dir.join("lorenz.svg"))?;
    centre_scatter(bundle, &dir.join("centre_scatter.svg"))?;
    distance_ecdf(bundle, &dir.join("distance_ecdf.svg"))?;
    Ok(())
}

fn score_distribution(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let scores: Vec<f64> = bundle.scores.iter().map(|r| r.components.phi).collect();
    let max = scores.iter().cloned().fold(1.0f64, f64::max) * 1.05;
    let n_bins = 30usize;
    let width = max / n_bins as f64;
    let mut counts = vec![0u32; n_bins];
    for &s in &scores {
        counts[((s / width) as usize).min(n_bins - 1)] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1);

    let root = SVGBackend::new(path, (900, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Supplier score distribution", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(44)
        .build_cartesian_2d(0.0..max, 0u32..peak + 1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("score")
        .y_desc("suppliers")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(counts.iter().enumerate().map(|(i, &c)| {
            Rectangle::new(
                [(i as f64 * width, 0), ((i + 1) as f64 * width, c)],
                BLUE.mix(0.45).filled(),
            )
        }))
        .map_err(plot_err)?;

    // tier boundaries: lowest score in each of the upper tiers
    for (tier, colour) in [(Tier::Moderate, tier_colour(Tier::Moderate)), (Tier::High, RED)] {
        if let Some(cut) = bundle
            .scores
            .iter()
            .filter(|r| r.tier == tier)
            .map(|r| r.components.phi)
            .fold(None::<f64>, |acc, v| Some(acc.map_or(v, |a| a.min(v))))
        {
            chart
                .draw_series(LineSeries::new(vec![(cut, 0), (cut, peak + 1)], colour.stroke_width(2)))
                .map_err(plot_err)?;
        }
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

fn lorenz_curve(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let root = SVGBackend::new(path, (640, 640)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Spend concentration (Lorenz)", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(44)
        .build_cartesian_2d(0.0..1.0, 0.0..1.0)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("cumulative supplier share")
        .y_desc("cumulative spend share")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(vec![(0.0, 0.0), (1.0, 1.0)], BLACK.mix(0.4)))
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(bundle.lorenz.clone(), BLUE.stroke_width(2)))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn centre_scatter(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let phi_of: std::collections::BTreeMap<&str, f64> =
        bundle.scores.iter().map(|r| (r.supplier.as_str(), r.components.phi)).collect();
    let x_max = bundle.anchoring.config.range_max;
    let y_max = bundle
        .scores
        .iter()
        .map(|r| r.components.phi)
        .fold(1.0f64, f64::max)
        * 1.1;

    let root = SVGBackend::new(path, (960, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Mixture centres vs supplier score", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(0.0..x_max, 0.0..y_max)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("centre (GBP)")
        .y_desc("supplier score")
        .draw()
        .map_err(plot_err)?;
    for &peak in &bundle.anchoring.peaks {
        chart
            .draw_series(LineSeries::new(
                vec![(peak, 0.0), (peak, y_max)],
                BLACK.mix(0.35),
            ))
            .map_err(plot_err)?;
    }
    for tier in [Tier::Low, Tier::Moderate, Tier::High] {
        chart
            .draw_series(
                bundle
                    .centres
                    .iter()
                    .filter(|c| c.tier == tier && c.centre_gbp <= x_max)
                    .map(|c| {
                        Circle::new(
                            (c.centre_gbp, phi_of.get(c.supplier.as_str()).copied().unwrap_or(0.0)),
                            3,
                            tier_colour(tier).filled(),
                        )
                    }),
            )
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

fn distance_ecdf(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let x_max = bundle
        .anchoring
        .distances
        .iter()
        .map(|d| d.pct_distance)
        .fold(1.0f64, f64::max)
        * 1.05;
    let mut chart = ChartBuilder::on(&root)
        .caption("Distance to nearest peak by tier (ECDF)", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(44)
        .build_cartesian_2d(0.0..x_max, 0.0..1.0)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("distance to nearest peak (% of peak)")
        .y_desc("ECDF")
        .draw()
        .map_err(plot_err)?;
    for tier in [Tier::High, Tier::Low] {
        let mut values: Vec<f64> = bundle
            .anchoring
            .distances
            .iter()
            .filter(|d| d.tier == tier)
            .map(|d| d.pct_distance)
            .collect();
        if values.is_empty() {
            continue;
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = values.len() as f64;
        let mut points = vec![(0.0, 0.0)];
        for (i, &v) in values.iter().enumerate() {
            points.push((v, i as f64 / n));
            points.push((v, (i + 1) as f64 / n));
        }
        chart
            .draw_series(LineSeries::new(points, tier_colour(tier).stroke_width(2)))
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}
