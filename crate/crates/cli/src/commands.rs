use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use squashnet_core::domain::load_set_csv;
use squashnet_core::{
    deserialize, separate_point_from_set, separate_scalar_points, separate_sets_squashed,
    serialize, sup_error_report, Error as CoreError, GridDomain, LayeredNetwork, RefinementTrace,
    TargetFunction,
};

use crate::specs::{parse_floats, parse_sigma};
use crate::{
    ApproximateArgs, ExportArgs, SeparatePointSetArgs, SeparatePointsArgs, SeparateSetsArgs,
    VerifyArgs,
};

const SIDE_PROBES: usize = 50;

fn parse_domain(spec: &str) -> Result<GridDomain> {
    spec.parse::<GridDomain>()
        .with_context(|| format!("domain {spec:?}"))
}

fn write_network(path: &Path, net: &LayeredNetwork) -> Result<()> {
    fs::write(path, serialize(net)).with_context(|| format!("writing {}", path.display()))
}

fn read_network(path: &Path) -> Result<LayeredNetwork> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    deserialize(&bytes).with_context(|| format!("network file {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_trace(path: &Path, trace: &RefinementTrace) -> Result<()> {
    let mut out = create(path)?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn widths(net: &LayeredNetwork) -> String {
    let stats = net.stats();
    format!("{:?} ({} parameters)", stats.widths, stats.parameter_count)
}

pub fn separate_points(args: SeparatePointsArgs) -> Result<()> {
    let sigma = parse_sigma(&args.sigma.sigma)?;
    let probe_range = match &args.probe_range {
        Some(spec) => match parse_floats(spec)?[..] {
            [lo, hi] if lo < hi => Some((lo, hi)),
            _ => bail!("probe range must be lo,hi with lo < hi"),
        },
        None => None,
    };
    if args.probe_csv.is_some() && args.probe_count < 2 {
        bail!("probe count must be at least 2");
    }
    if args.side_conditions && args.eps >= 0.5 {
        eprintln!(
            "warning: eps = {} but the monotone side conditions need eps < 1/2; \
             only the two point conditions are checked",
            args.eps
        );
    }
    let gate = separate_scalar_points(&sigma, args.x0, args.x1, args.eps)?;
    let v0 = gate.apply(&sigma, args.x0);
    let v1 = gate.apply(&sigma, args.x1);
    println!("s: {}", gate.s);
    println!("t: {}", gate.t);
    println!("sigma(s + t*x0): {v0}");
    println!("sigma(s + t*x1): {v1}");
    if !(v0 < args.eps && v1 > 1.0 - args.eps) {
        return Err(CoreError::ConstructionFailed {
            point: vec![args.x0, args.x1],
            value: if v0 < args.eps { v1 } else { v0 },
            bound: format!("gate levels eps = {}", args.eps),
        }
        .into());
    }

    if args.side_conditions && args.eps < 0.5 {
        // beyond x0 (away from x1) the gate stays low, beyond x1 it stays high
        let gap = args.x1 - args.x0;
        let mut worst_low = f64::NEG_INFINITY;
        let mut worst_high = f64::INFINITY;
        for k in 1..=SIDE_PROBES {
            let step = 10.0 * gap * k as f64 / SIDE_PROBES as f64;
            worst_low = worst_low.max(gate.apply(&sigma, args.x0 - step));
            worst_high = worst_high.min(gate.apply(&sigma, args.x1 + step));
        }
        println!("max beyond x0: {worst_low}");
        println!("min beyond x1: {worst_high}");
        if worst_low >= args.eps || worst_high <= 1.0 - args.eps {
            return Err(CoreError::ConstructionFailed {
                point: vec![args.x0, args.x1],
                value: if worst_low >= args.eps {
                    worst_low
                } else {
                    worst_high
                },
                bound: "monotone side conditions".into(),
            }
            .into());
        }
        println!("side conditions: hold at {SIDE_PROBES} probes per side");
    }

    if let Some(path) = &args.probe_csv {
        let (lo, hi) = probe_range.unwrap_or_else(|| {
            let (a, b) = (args.x0.min(args.x1), args.x0.max(args.x1));
            (a - (b - a), b + (b - a))
        });
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["x", "value"])?;
        for k in 0..args.probe_count {
            let x = lo + (hi - lo) * k as f64 / (args.probe_count - 1) as f64;
            w.write_record([x.to_string(), gate.apply(&sigma, x).to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn separate_point_set(args: SeparatePointSetArgs) -> Result<()> {
    let sigma = parse_sigma(&args.sigma.sigma)?;
    let domain = parse_domain(&args.domain)?;
    let x0 = parse_floats(&args.x0).context("x0")?;
    let set = load_set_csv(&args.set, &domain)
        .with_context(|| format!("loading {}", args.set.display()))?;
    let sep = separate_point_from_set(&x0, &set, args.eps, &sigma)?;
    let values = sep.network.evaluate_many(set.points())?;
    let min_b = values.iter().copied().fold(f64::INFINITY, f64::min);
    println!("g(x0): {}", sep.network.evaluate(&x0)?);
    println!("min over set: {min_b}");
    println!("cover size: {}", sep.cover_sizes[0]);
    println!("widths: {}", widths(&sep.network));
    write_network(&args.out, &sep.network)
}

fn extreme(values: &[f64], max: bool) -> String {
    let folded = if max {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    if values.is_empty() {
        "n/a (empty set)".into()
    } else {
        folded.to_string()
    }
}

pub fn separate_sets(args: SeparateSetsArgs) -> Result<()> {
    let sigma = parse_sigma(&args.sigma.sigma)?;
    let domain = parse_domain(&args.domain)?;
    let a = load_set_csv(&args.set_a, &domain)
        .with_context(|| format!("loading {}", args.set_a.display()))?;
    let b = load_set_csv(&args.set_b, &domain)
        .with_context(|| format!("loading {}", args.set_b.display()))?;
    let h = separate_sets_squashed(&a, &b, args.eps, &sigma)?;
    println!(
        "min over A: {}",
        extreme(&h.network.evaluate_many(a.points())?, false)
    );
    println!(
        "max over B: {}",
        extreme(&h.network.evaluate_many(b.points())?, true)
    );
    println!("cover sizes: {:?}", h.cover_sizes);
    println!("widths: {}", widths(&h.network));
    write_network(&args.out, &h.network)
}

pub fn approximate(args: ApproximateArgs) -> Result<()> {
    let sigma = parse_sigma(&args.sigma.sigma)?;
    let domain = parse_domain(&args.domain)?;
    let target = args.target.resolve(&domain)?;
    match squashnet_core::approximate(
        &target,
        &domain,
        args.eps,
        &sigma,
        args.beta,
        args.max_iterations,
    ) {
        Ok(run) => {
            write_network(&args.out, &run.approximant.network)?;
            if let Some(path) = &args.trace {
                write_trace(path, &run.trace)?;
            }
            println!("iterations: {}", run.trace.iterations.len());
            println!("final error: {}", run.final_error);
            println!("widths: {}", widths(&run.approximant.network));
            Ok(())
        }
        Err(CoreError::NotConverged(partial)) => {
            write_network(&args.out, &partial.approximant.network)?;
            if let Some(path) = &args.trace {
                write_trace(path, &partial.trace)?;
            }
            println!("iterations: {}", partial.trace.iterations.len());
            println!("final error: {}", partial.final_error);
            Err(CoreError::NotConverged(partial).into())
        }
        Err(e) => Err(e.into()),
    }
}

fn grid_for(spec: &str, multiplier: usize) -> Result<GridDomain> {
    let domain = parse_domain(spec)?;
    if multiplier == 1 {
        Ok(domain)
    } else {
        Ok(domain.refined(multiplier)?)
    }
}

fn write_values(
    path: &Path,
    net: &LayeredNetwork,
    domain: &GridDomain,
    target: Option<&TargetFunction>,
) -> Result<()> {
    let points = squashnet_core::grid_points(domain);
    let values = net.evaluate_many(&points)?;
    let samples = target
        .map(|t| squashnet_core::sample_target(t, domain))
        .transpose()?;
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = (1..=domain.dim()).map(|i| format!("x{i}")).collect();
    header.push("network".into());
    if samples.is_some() {
        header.extend(["target".into(), "error".into()]);
    }
    w.write_record(&header)?;
    for (i, (p, v)) in points.iter().zip(&values).enumerate() {
        let mut rec: Vec<String> = p.iter().map(f64::to_string).collect();
        rec.push(v.to_string());
        if let Some(samples) = &samples {
            rec.push(samples[i].to_string());
            rec.push((v - samples[i]).abs().to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn verify(args: VerifyArgs) -> Result<()> {
    let net = read_network(&args.network)?;
    let domain = grid_for(&args.domain, args.verify_multiplier)?;
    let target = args.target.resolve(&domain)?;
    let report = sup_error_report(&net, &target, &domain)?;
    if args.verify_multiplier == 1 {
        println!("grid: {} points", domain.len());
        println!("sup error: {}", report.value);
    } else {
        println!(
            "grid: {} points, {}x finer than the given grid",
            domain.len(),
            args.verify_multiplier
        );
        println!("sup error: {} (finer grid, no guarantee)", report.value);
    }
    println!("argmax: {:?}", report.argmax);
    if let Some(path) = &args.heatmap {
        write_values(path, &net, &domain, Some(&target))?;
    }
    Ok(())
}

pub fn export(args: ExportArgs) -> Result<()> {
    let net = read_network(&args.network)?;
    let domain = grid_for(&args.domain, args.verify_multiplier)?;
    let target = args
        .target
        .as_ref()
        .map(|t| t.resolve(&domain))
        .transpose()?;
    write_values(&args.out, &net, &domain, target.as_ref())?;
    println!("wrote {} rows to {}", domain.len(), args.out.display());
    Ok(())
}
