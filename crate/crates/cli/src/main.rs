//! `edgeforce` command-line front end.
//!
//! Every subcommand reads PGM inputs and writes its artifacts into
//! `--out-dir` under fixed names:
//!
//! | subcommand | files |
//! |------------|-------|
//! | synth    | `--out` (default `<kind>.pgm`) |
//! | edges    | `edges_mask.pgm`, `edges.json` |
//! | current  | `current.tsv`, `current_glyphs.txt` |
//! | force    | `force.json` |
//! | map      | `map.tsv`, `map_glyphs.txt` |
//! | classify | `classify.ppm`, `classify.json` |
//! | match    | `match.json` |
//! | bench    | `bench.txt` |
//!
//! JSON results are also printed to stdout. Exit status: 0 on success, 2 on
//! bad arguments or unreadable input, 1 when processing fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgeforce::edgecurrent::{extract, extract_current};
use edgeforce::emforce::{force_map, force_map_fast, total_force};
use edgeforce::matchmap::{classify_map, default_max_steps, match_currents, summarize_map};
use edgeforce::raster::{load_pgm, save_pgm, save_ppm, synth_shape};
use edgeforce::render::{
    current_tsv, force_map_tsv, render_classification_ppm, render_current_glyphs, render_direction_glyphs,
};
use edgeforce::{EdgeCurrent, EdgeParams, Error, ForceMap, ForceParams, GrayImage, Shape, ShapeKind, Vec2};
use serde_json::json;

const GLYPH_HELP: &str = "Direction glyphs: > E, \\ SE, v S, / SW, < W, , NW, ^ N, ` NE, . no force.";

#[derive(Parser)]
#[command(name = "edgeforce", version, about = "Match images under integer shift with virtual edge currents")]
#[command(after_help = GLYPH_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic shape as PGM.
    Synth(SynthArgs),
    /// Extract significant edges: mask PGM plus diagnostics.
    Edges(ImageArgs),
    /// Extract the edge current: TSV table plus glyph grid.
    Current(ImageArgs),
    /// Total force on image 1 displaced by --shift over image 2.
    Force(ForceCmd),
    /// Force distribution map over image 2's frame: TSV plus glyph grid.
    Map(MapCmd),
    /// Classify every map cell: PPM plus label counts.
    Classify(ClassifyCmd),
    /// Recover the shift of image 1 relative to image 2.
    Match(MatchCmd),
    /// Time the reference map against the fast map.
    Bench(BenchCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Square,
    Rectangle,
    Ellipse,
    Circle,
    Line,
}

impl From<Kind> for ShapeKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Square => ShapeKind::Square,
            Kind::Rectangle => ShapeKind::Rectangle,
            Kind::Ellipse => ShapeKind::Ellipse,
            Kind::Circle => ShapeKind::Circle,
            Kind::Line => ShapeKind::Line,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Canvas side in pixels.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(3..=4096))]
    size: u32,
    /// Translate the rendered shape by dx,dy (zero fill).
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,0")]
    shift: (i64, i64),
    /// Output file; defaults to <out-dir>/<kind>.pgm.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EdgeOpts {
    /// Edge threshold as a fraction of the maximum gradient magnitude.
    #[arg(long, default_value_t = 0.20, value_parser = parse_fraction)]
    threshold: f64,
    /// Strict comparison in non-maximum suppression.
    #[arg(long)]
    strict_nms: bool,
}

impl EdgeOpts {
    fn params(&self) -> EdgeParams {
        EdgeParams {
            threshold_pct: self.threshold,
            strict_nms: self.strict_nms,
            ..EdgeParams::default()
        }
    }
}

#[derive(Args)]
struct ForceOpts {
    /// Plane separation in pixels.
    #[arg(long, default_value_t = 0.0, value_parser = parse_non_negative)]
    height: f64,
    /// Force constant.
    #[arg(short = 'A', long = "force-constant", default_value_t = 1.0, value_parser = parse_positive)]
    a: f64,
}

impl ForceOpts {
    fn params(&self) -> ForceParams {
        ForceParams {
            a: self.a,
            ..ForceParams::with_height(self.height)
        }
    }
}

#[derive(Args)]
struct Pair {
    /// Image 1 (the moving image).
    #[arg(long)]
    img1: PathBuf,
    /// Image 2 (the reference frame); defaults to image 1.
    #[arg(long)]
    img2: Option<PathBuf>,
}

#[derive(Args)]
struct ImageArgs {
    image: PathBuf,
    #[command(flatten)]
    edge: EdgeOpts,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ForceCmd {
    #[command(flatten)]
    pair: Pair,
    #[command(flatten)]
    edge: EdgeOpts,
    #[command(flatten)]
    force: ForceOpts,
    /// Extra displacement dx,dy applied to image 1.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,0")]
    shift: (i64, i64),
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct MapCmd {
    #[command(flatten)]
    pair: Pair,
    #[command(flatten)]
    edge: EdgeOpts,
    #[command(flatten)]
    force: ForceOpts,
    /// Use the reference double sum instead of the precomputed field.
    #[arg(long)]
    naive: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ClassifyCmd {
    #[command(flatten)]
    map: MapCmd,
    /// Step budget per walk; defaults to 4*W*H.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,
}

#[derive(Args)]
struct MatchCmd {
    #[command(flatten)]
    pair: Pair,
    #[command(flatten)]
    edge: EdgeOpts,
    #[command(flatten)]
    force: ForceOpts,
    /// Initial displacement dx,dy of image 1.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,0")]
    start: (i64, i64),
    /// Step budget; defaults to 4*W*H.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchCmd {
    /// Image 1; without it a 32x32 rectangle is matched against itself.
    #[arg(long)]
    img1: Option<PathBuf>,
    #[arg(long, requires = "img1")]
    img2: Option<PathBuf>,
    #[command(flatten)]
    edge: EdgeOpts,
    #[command(flatten)]
    force: ForceOpts,
    /// Timed runs per method; the fastest is reported.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=100))]
    repeats: u32,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected dx,dy, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is negative"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

/// Failure carrying its exit status.
enum Failure {
    Usage(String),
    Processing(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyCurrent(_) => Failure::Processing(e.to_string()),
            Error::Format { .. } | Error::Param(_) | Error::TooSmall { .. } | Error::Argument(_) => {
                Failure::Usage(e.to_string())
            }
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_image(path: &Path) -> Result<GrayImage, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    load_pgm(&bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, data: impl AsRef<[u8]>) -> Outcome {
    write_path(&dir.join(name), data)
}

fn write_path(path: &Path, data: impl AsRef<[u8]>) -> Outcome {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::Processing(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, data).map_err(|e| Failure::Processing(format!("cannot write {}: {e}", path.display())))
}

fn emit_json(dir: &Path, name: &str, value: &serde_json::Value) -> Outcome {
    let text = format!("{value}\n");
    print!("{text}");
    write(dir, name, text)
}

fn currents(pair: &Pair, edge: &EdgeOpts) -> Result<(EdgeCurrent, EdgeCurrent), Failure> {
    let img1 = read_image(&pair.img1)?;
    let img2 = match &pair.img2 {
        Some(p) => read_image(p)?,
        None => img1.clone(),
    };
    let params = edge.params();
    let c1 = extract_current(&img1, &params).map_err(|e| match e {
        Error::EmptyCurrent(_) => Failure::Processing("no edge current in image 1".into()),
        e => e.into(),
    })?;
    let c2 = extract_current(&img2, &params).map_err(|e| match e {
        Error::EmptyCurrent(_) => Failure::Processing("no edge current in image 2".into()),
        e => e.into(),
    })?;
    Ok((c1, c2))
}

fn step_budget(max_steps: Option<u64>, c2: &EdgeCurrent) -> usize {
    max_steps.map_or_else(|| default_max_steps(c2.width(), c2.height()), |n| n as usize)
}

fn synth(args: SynthArgs) -> Outcome {
    let n = args.size as usize;
    let kind = ShapeKind::from(args.kind);
    let img = synth_shape(Shape::default_for(kind, n, n), n, n)?.translated(args.shift.0, args.shift.1);
    let out = args.out.unwrap_or_else(|| {
        let name = args.kind.to_possible_value().expect("no skipped variants").get_name().to_owned();
        args.out_dir.join(format!("{name}.pgm"))
    });
    write_path(&out, save_pgm(&img))
}

fn edges(args: ImageArgs) -> Outcome {
    let img = read_image(&args.image)?;
    let res = extract(&img, &args.edge.params())?;
    let max = res.field.magnitudes().into_iter().fold(0.0, f64::max);
    write(&args.out_dir, "edges_mask.pgm", save_pgm(&res.mask.to_image()?))?;
    emit_json(
        &args.out_dir,
        "edges.json",
        &json!({
            "width": img.width(),
            "height": img.height(),
            "max_magnitude": max,
            "threshold": args.edge.threshold * max,
            "above_threshold": res.thresholded.count(),
            "edge_points": res.mask.count(),
            "current_elements": res.current.len(),
            "dropped_zero_gradient": res.dropped_zero_gradient,
        }),
    )
}

fn current(args: ImageArgs) -> Outcome {
    let img = read_image(&args.image)?;
    let c = extract_current(&img, &args.edge.params())?;
    write(&args.out_dir, "current.tsv", current_tsv(&c))?;
    write(&args.out_dir, "current_glyphs.txt", render_current_glyphs(&c))
}

fn force(args: ForceCmd) -> Outcome {
    let (c1, c2) = currents(&args.pair, &args.edge)?;
    let fp = args.force.params();
    let f = total_force(&c1, &c2, Vec2::new(args.shift.0 as f64, args.shift.1 as f64), &fp);
    emit_json(&args.out_dir, "force.json", &json!({ "fx": f.x, "fy": f.y, "fz": f.z }))
}

fn build_map(args: &MapCmd) -> Result<ForceMap, Failure> {
    let (c1, c2) = currents(&args.pair, &args.edge)?;
    let fp = args.force.params();
    let map = if args.naive {
        force_map(&c1, &c2, &fp)?
    } else {
        force_map_fast(&c1, &c2, &fp)?
    };
    Ok(map)
}

fn map(args: MapCmd) -> Outcome {
    let map = build_map(&args)?;
    write(&args.out_dir, "map.tsv", force_map_tsv(&map))?;
    write(&args.out_dir, "map_glyphs.txt", render_direction_glyphs(&map))
}

fn classify(args: ClassifyCmd) -> Outcome {
    let map = build_map(&args.map)?;
    let steps = args.max_steps.map_or_else(|| default_max_steps(map.width(), map.height()), |n| n as usize);
    let cls = classify_map(&map, steps)?;
    write(&args.map.out_dir, "classify.ppm", save_ppm(&render_classification_ppm(&cls, true)))?;
    emit_json(&args.map.out_dir, "classify.json", &summarize_map(&cls).to_json())
}

fn matching(args: MatchCmd) -> Outcome {
    let (c1, c2) = currents(&args.pair, &args.edge)?;
    let steps = step_budget(args.max_steps, &c2);
    let r = match_currents(&c1, &c2, &args.force.params(), args.start, steps)?;
    emit_json(&args.out_dir, "match.json", &r.to_json())
}

fn fastest(repeats: u32, mut f: impl FnMut() -> edgeforce::Result<ForceMap>) -> Result<(ForceMap, Duration), Failure> {
    let mut best = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let map = f()?;
        let dt = t.elapsed();
        if best.as_ref().is_none_or(|(_, b)| dt < *b) {
            best = Some((map, dt));
        }
    }
    Ok(best.expect("at least one repeat"))
}

fn bench(args: BenchCmd) -> Outcome {
    let (c1, c2) = match args.img1 {
        Some(img1) => currents(&Pair { img1, img2: args.img2 }, &args.edge)?,
        None => {
            let img = synth_shape(Shape::default_for(ShapeKind::Rectangle, 32, 32), 32, 32)?;
            let c = extract_current(&img, &args.edge.params())?;
            (c.clone(), c)
        }
    };
    let fp = args.force.params();
    let (naive, t_naive) = fastest(args.repeats, || force_map(&c1, &c2, &fp))?;
    let (fast, t_fast) = fastest(args.repeats, || force_map_fast(&c1, &c2, &fp))?;
    // Relative to the strongest cell: near-balance cells are pure
    // cancellation and make per-cell ratios meaningless.
    let peak = naive.cells().iter().map(|f| f.norm()).fold(0.0, f64::max);
    let max_diff = naive.cells().iter().zip(fast.cells()).map(|(a, b)| (*b - *a).norm()).fold(0.0, f64::max);
    let report = format!(
        "map\t{}x{}\nelements\t{} x {}\nnaive_ms\t{:.3}\nfast_ms\t{:.3}\nspeedup\t{:.1}\nmax_diff_over_peak\t{:.3e}\n",
        naive.width(),
        naive.height(),
        c1.len(),
        c2.len(),
        t_naive.as_secs_f64() * 1e3,
        t_fast.as_secs_f64() * 1e3,
        t_naive.as_secs_f64() / t_fast.as_secs_f64(),
        max_diff / peak.max(f64::MIN_POSITIVE),
    );
    print!("{report}");
    write(&args.out_dir, "bench.txt", report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Edges(a) => edges(a),
        Command::Current(a) => current(a),
        Command::Force(a) => force(a),
        Command::Map(a) => map(a),
        Command::Classify(a) => classify(a),
        Command::Match(a) => matching(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Processing(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
