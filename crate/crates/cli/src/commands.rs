use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tdabm::cover::{build_cover, Cover, CoverConfig};
use tdabm::graph::{
    ball_summary, coloring_above, coloring_below, filter_by, points_and_balls, set_coloring, BallGraph,
};
use tdabm::ingest::{load_csv, standardize, synthesize, write_csv, ColoringVariable, DatasetSpec, PointCloud};
use tdabm::layout::{spring_layout, LayoutConfig};
use tdabm::render::{export_dot, export_json, import_json, render_svg, ColorMap, GraphDocument, RenderConfig};
use tdabm::stability::{ball_count_distribution, parse_claim, run_stability, run_stability_jobs};

use crate::{
    manifest, BuildArgs, CliError, DataArgs, LayoutArgs, PlotArgs, ServeArgs, StabilityArgs, SummaryArgs, SynthArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_document(path: &Path) -> Result<GraphDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(import_json(&text)?)
}

fn load(
    input: &Path,
    axes: &[String],
    color: Option<&str>,
    standardized: bool,
) -> Result<(PointCloud, Option<ColoringVariable>)> {
    let axes: Vec<&str> = axes.iter().map(String::as_str).collect();
    let (cloud, coloring) = load_csv(input, &axes, color)?;
    let cloud = if standardized { standardize(&cloud)? } else { cloud };
    log::info!("{}: {} rows, {} axes", input.display(), cloud.n(), cloud.k());
    Ok((cloud, coloring))
}

fn load_data(d: &DataArgs) -> Result<(PointCloud, Option<ColoringVariable>)> {
    load(&d.input, &d.axes, d.color.as_deref(), !d.no_standardize)
}

/// Graph colored by every axis and the outcome.
fn colored_graph(cover: &Cover, cloud: &PointCloud, coloring: Option<&ColoringVariable>) -> Result<BallGraph> {
    let mut graph = BallGraph::from_cover(cover);
    for axis in cloud.columns() {
        graph = set_coloring(&graph, cover, &cloud.column_variable(axis)?)?;
    }
    if let Some(c) = coloring {
        graph = set_coloring(&graph, cover, c)?;
    }
    Ok(graph)
}

fn layout_config(l: &LayoutArgs) -> Result<LayoutConfig> {
    let config = LayoutConfig {
        k: l.spring_k,
        seed: l.layout_seed.unwrap_or(0),
        iterations: l.iterations.unwrap_or(LayoutConfig::default().iterations),
    };
    config.validate()?;
    Ok(config)
}

fn check_eps(eps: f64) -> Result<()> {
    Ok(CoverConfig::sequential(eps).validate()?)
}

pub fn build(a: &BuildArgs) -> Result<()> {
    check_eps(a.eps)?;
    let layout_cfg = layout_config(&a.layout)?;
    let (cloud, coloring) = load_data(&a.data)?;
    let cover = build_cover(
        &cloud,
        &CoverConfig {
            eps: a.eps,
            policy: a.policy,
            seed: a.seed,
        },
    )?;
    let graph = colored_graph(&cover, &cloud, coloring.as_ref())?;
    let layout = spring_layout(&graph, &layout_cfg)?;
    write_text(&a.out, &export_json(&graph, &cover, Some(&layout))?)?;
    manifest::write("build", a, &[&a.data.input], &[&a.out])?;
    println!(
        "{} balls, {} edges (eps {}, {} policy) -> {}",
        graph.len(),
        graph.edges().len(),
        a.eps,
        a.policy,
        a.out.display()
    );
    Ok(())
}

fn manifest_str(args: &Option<Value>, key: &str) -> Option<String> {
    args.as_ref()?.get(key)?.as_str().map(str::to_string)
}

pub fn plot(a: &PlotArgs) -> Result<()> {
    let doc = read_document(&a.graph)?;
    let recorded = manifest::read_args(&a.graph);
    let coloring = match a.coloring.clone().or_else(|| manifest_str(&recorded, "color")) {
        Some(c) => c,
        None => doc
            .graph
            .coloring_names()
            .into_iter()
            .next()
            .ok_or_else(|| CliError::Validation("the graph has no colorings".into()))?,
    };
    doc.graph.coloring(&coloring)?;

    let relayout = a.layout.layout_seed.is_some() || a.layout.spring_k.is_some() || a.layout.iterations.is_some();
    let layout = match doc.layout {
        Some(l) if !relayout => l,
        _ => spring_layout(&doc.graph, &layout_config(&a.layout)?)?,
    };

    let mut graph = doc.graph;
    if let Some(t) = a.above {
        graph = filter_by(&graph, coloring_above(&coloring, t));
    }
    if let Some(t) = a.below {
        graph = filter_by(&graph, coloring_below(&coloring, t));
    }

    let config = RenderConfig {
        cmap: ColorMap::resolve(&a.cmap)?,
        colorbar: !a.no_colorbar,
        colorbar_label: a.colorbar_label.clone(),
        vmin: a.vmin,
        vmax: a.vmax,
        ..RenderConfig::new(coloring.clone())
    };
    let dot = a.out.extension().is_some_and(|e| e == "dot");
    let text = if dot {
        export_dot(&graph, &config)?
    } else {
        render_svg(&graph, &layout, &config)?
    };
    write_text(&a.out, &text)?;

    let cmap_file = PathBuf::from(&a.cmap);
    let mut inputs: Vec<&Path> = vec![&a.graph];
    if ColorMap::builtin(&a.cmap).is_none() {
        inputs.push(&cmap_file);
    }
    manifest::write("plot", a, &inputs, &[&a.out])?;
    println!("{} balls colored by {} -> {}", graph.len(), coloring, a.out.display());
    Ok(())
}

pub fn summary(a: &SummaryArgs) -> Result<()> {
    let doc = read_document(&a.graph)?;
    let recorded = manifest::read_args(&a.graph);
    let axes = match (&a.axes, &recorded) {
        (Some(axes), _) => axes.clone(),
        (None, Some(args)) => args
            .get("axes")
            .and_then(Value::as_array)
            .map(|v| v.iter().filter_map(|s| s.as_str().map(str::to_string)).collect())
            .unwrap_or_default(),
        (None, None) => Vec::new(),
    };
    if axes.is_empty() {
        return Err(CliError::Validation(format!(
            "no axes: pass --axes (no build manifest next to {})",
            a.graph.display()
        )));
    }
    let color = a.color.clone().or_else(|| manifest_str(&recorded, "color"));
    let standardized = if a.standardize {
        true
    } else if a.no_standardize {
        false
    } else {
        let recorded_off = recorded
            .as_ref()
            .and_then(|r| r.get("no_standardize"))
            .and_then(Value::as_bool);
        !recorded_off.unwrap_or(false)
    };

    let (cloud, coloring) = load(&a.input, &axes, color.as_deref(), standardized)?;
    let extra: Vec<ColoringVariable> = coloring.into_iter().collect();
    let table = ball_summary(&doc.cover, &cloud, &extra)?;
    table.write_csv(create(&a.out)?)?;
    let mut outputs: Vec<&Path> = vec![&a.out];
    if let Some(points) = &a.points {
        let merged = points_and_balls(&doc.cover).merge(&cloud, &extra)?;
        merged.write_csv(create(points)?)?;
        outputs.push(points);
    }
    manifest::write("summary", a, &[&a.graph, &a.input], &outputs)?;
    println!("{} balls summarised -> {}", table.rows.len(), a.out.display());
    Ok(())
}

pub fn stability(a: &StabilityArgs) -> Result<()> {
    check_eps(a.eps)?;
    if a.reps == 0 {
        return Err(CliError::Validation("--reps must be at least 1".into()));
    }
    let claims = if a.claims.is_empty() {
        vec![parse_claim("nonempty")?]
    } else {
        a.claims
            .iter()
            .map(|c| parse_claim(c))
            .collect::<tdabm::Result<Vec<_>>>()?
    };
    let (cloud, coloring) = load_data(&a.data)?;
    let coloring = coloring.ok_or_else(|| CliError::Validation("stability needs --color".into()))?;
    let report = match a.jobs {
        Some(jobs) if jobs > 0 => run_stability_jobs(&cloud, &coloring, a.eps, a.reps, a.seed, &claims, jobs)?,
        Some(_) => return Err(CliError::Validation("--jobs must be at least 1".into())),
        None => run_stability(&cloud, &coloring, a.eps, a.reps, a.seed, &claims)?,
    };
    if a.out.extension().is_some_and(|e| e == "csv") {
        report.write_csv(create(&a.out)?)?;
    } else {
        write_text(&a.out, &report.to_json()?)?;
    }
    manifest::write("stability", a, &[&a.data.input], &[&a.out])?;

    println!(
        "{} repetitions at eps {} -> {}",
        report.reps,
        report.eps,
        a.out.display()
    );
    for name in &report.claims {
        println!(
            "  {name}: held in {:.1}% of repetitions",
            100.0 * report.aggregate[name]
        );
    }
    let hist = ball_count_distribution(&report);
    let counts: Vec<String> = hist
        .iter()
        .map(|(balls, reps)| format!("{balls} balls x{reps}"))
        .collect();
    println!("  ball counts: {}", counts.join(", "));
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let spec = DatasetSpec {
        n: a.n,
        seed: a.seed,
        target_correlation: a.rho,
        standardize: !a.no_standardize,
    };
    let (cloud, y) = synthesize(&spec)?;
    write_csv(create(&a.out)?, &cloud, &[y])?;
    manifest::write("synth", a, &[], &[&a.out])?;
    println!("{} rows -> {}", cloud.n(), a.out.display());
    Ok(())
}

pub fn serve(a: &ServeArgs) -> Result<()> {
    let config = tdabm_serve::ServeConfig {
        fixtures: a.fixtures.clone(),
        assets: a.assets.clone(),
    };
    let addr = std::net::SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    println!("serving on http://{addr}");
    runtime
        .block_on(tdabm_serve::serve(addr, config))
        .map_err(|e| CliError::Io(format!("{addr}: {e}")))
}
