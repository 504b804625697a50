use std::io::{self, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use anyhow::{Context, Result};
use nalgebra::DMatrix;

use synesthete_core::affect::{
    self, build_affect_training_set, read_labeled_expressions, PadAnchorTable,
};
use synesthete_core::chroma::{self, build_color_training_set, ColorTrainingMode, PlutchikTable};
use synesthete_core::device::{serial_sink, ColorSink, SimulatorSink};
use synesthete_core::expression::LandmarkReader;
use synesthete_core::ib::{solve_ib_restarts, DiscreteJoint, IbOptions};
use synesthete_core::pipeline::{StreamOptions, Transcoder, TranscoderConfig};

use crate::output::{open_input, read_bytes, read_text, write_atomic, AtomicFile};
use crate::{
    IbSolveArgs, LampSimArgs, SinkSpec, TablesDumpArgs, TrainAffectArgs, TrainColorArgs,
    TrainingMode, TranscodeArgs, Which,
};

pub fn train_affect(args: TrainAffectArgs) -> Result<()> {
    let anchors = match &args.anchors {
        Some(p) => PadAnchorTable::from_json(&read_text(p)?)
            .with_context(|| format!("anchor table {}", p.display()))?,
        None => PadAnchorTable::bundled(),
    };
    let f = std::fs::File::open(&args.data)
        .with_context(|| format!("cannot open {}", args.data.display()))?;
    let rows = read_labeled_expressions(BufReader::new(f))
        .with_context(|| format!("{}", args.data.display()))?;
    let ts = build_affect_training_set(&rows, &anchors)
        .with_context(|| format!("{}", args.data.display()))?;
    let model = affect::train_affect(&ts, args.lambda)?;
    write_atomic(&args.out, model.to_json().as_bytes())?;

    let rmse = model.linear().residual_rmse();
    println!(
        "rows={} lambda={} rmse P={:.6} A={:.6} D={:.6}",
        ts.len(),
        args.lambda,
        rmse[0],
        rmse[1],
        rmse[2]
    );
    Ok(())
}

pub fn train_color(args: TrainColorArgs) -> Result<()> {
    let table = match &args.table {
        Some(p) => PlutchikTable::from_json(&read_text(p)?)
            .with_context(|| format!("colour table {}", p.display()))?,
        None => PlutchikTable::bundled(),
    };
    let mode = match args.mode {
        TrainingMode::Table => ColorTrainingMode::Table,
        TrainingMode::Hybrid => ColorTrainingMode::Hybrid,
    };
    let pairs = build_color_training_set(&table, mode);
    let model = chroma::train_color(&pairs, args.lambda)?;
    write_atomic(&args.out, model.to_json().as_bytes())?;

    let rmse = model.linear().residual_rmse();
    println!(
        "rows={} lambda={} rmse cos_h={:.6} sin_h={:.6} s={:.6} l={:.6}",
        pairs.len(),
        args.lambda,
        rmse[0],
        rmse[1],
        rmse[2],
        rmse[3]
    );
    Ok(())
}

/// Cloneable in-memory writer so the simulator dump can be committed
/// atomically once the stream ends.
#[derive(Clone, Default)]
struct SharedBuf(Arc<Mutex<Vec<u8>>>);

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().expect("dump buffer").extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

fn transcoder_config(args: &TranscodeArgs) -> Result<TranscoderConfig> {
    let mut cfg = match &args.config {
        Some(path) => TranscoderConfig::from_file(path)?,
        None => TranscoderConfig::new(
            args.affect_model.clone().expect("required by clap"),
            args.color_model.clone().expect("required by clap"),
        ),
    };
    if let Some(p) = &args.anchors {
        cfg.anchor_table_path = Some(p.clone());
    }
    if let Some(p) = &args.table {
        cfg.plutchik_table_path = Some(p.clone());
    }
    if let Some(a) = args.alpha {
        cfg.smoothing_alpha = a;
    }
    if args.stochastic {
        cfg.stochastic = true;
    }
    if let Some(s) = args.seed {
        cfg.rng_seed = s;
    }
    if args.no_clamp {
        cfg.clamp = false;
    }
    if let Some(i) = args.interpretation {
        cfg.color_interpretation = i.into();
    }
    Ok(cfg)
}

pub fn transcode(args: TranscodeArgs) -> Result<()> {
    let cfg = transcoder_config(&args)?;
    let transcoder = Transcoder::load(&cfg)?;
    let frames = LandmarkReader::new(open_input(&args.input)?, args.format.into());

    let dump = args.sim_dump.as_ref().map(|_| SharedBuf::default());
    let mut sink: Box<dyn ColorSink + Send> = match &args.sink {
        SinkSpec::Sim => {
            let sim = SimulatorSink::new(1);
            Box::new(match &dump {
                Some(buf) => sim.with_dump(Box::new(buf.clone())),
                None => sim,
            })
        }
        SinkSpec::Serial(port) => Box::new(serial_sink(port, args.baud)?),
    };

    let opts = StreamOptions {
        lenient: args.lenient,
        ..StreamOptions::default()
    };
    let summary = match args.diag.as_deref() {
        None => transcoder.run_stream(frames, sink.as_mut(), &opts, None)?,
        Some("-") => {
            let mut out = io::stdout().lock();
            transcoder.run_stream(frames, sink.as_mut(), &opts, Some(&mut out))?
        }
        Some(path) => {
            let mut out = AtomicFile::create(Path::new(path))?;
            let summary = transcoder.run_stream(frames, sink.as_mut(), &opts, Some(&mut out))?;
            out.commit()?;
            summary
        }
    };
    drop(sink);
    if let (Some(path), Some(buf)) = (&args.sim_dump, dump) {
        let bytes = buf.0.lock().expect("dump buffer").clone();
        write_atomic(path, &bytes)?;
    }

    eprintln!("{}", serde_json::to_string(&summary)?);
    if summary.sink_errors > 0 {
        anyhow::bail!("{} colours could not be delivered", summary.sink_errors);
    }
    Ok(())
}

/// Relabels clusters in order of first appearance so equal partitions
/// print identically.
fn canonical_partition(assign: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    assign
        .iter()
        .map(|&e| match map.iter().find(|(from, _)| *from == e) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len();
                map.push((e, to));
                to
            }
        })
        .collect()
}

fn write_matrix(
    out: &mut impl Write,
    row_name: &str,
    col_prefix: &str,
    m: &DMatrix<f64>,
) -> Result<()> {
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("{col_prefix}{j}")).collect();
    writeln!(out, "{row_name},{}", header.join(","))?;
    for (i, row) in m.row_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.9}")).collect();
        writeln!(out, "{i},{}", cells.join(","))?;
    }
    Ok(())
}

pub fn ib_solve(args: IbSolveArgs) -> Result<()> {
    let f = std::fs::File::open(&args.joint)
        .with_context(|| format!("cannot open {}", args.joint.display()))?;
    let (joint, total) = DiscreteJoint::from_csv(BufReader::new(f))
        .with_context(|| format!("{}", args.joint.display()))?;
    log::info!("joint total before normalization: {total}");

    let mut opts = IbOptions::new(args.k as usize, args.beta).seed(args.seed);
    opts.max_iter = args.max_iter as usize;
    let sol = solve_ib_restarts(&joint, &opts, args.restarts as usize)?;

    let mut out = io::stdout().lock();
    writeln!(out, "# objective trace")?;
    writeln!(out, "sweep,objective")?;
    for (i, obj) in sol.objective_trace.iter().enumerate() {
        writeln!(out, "{i},{obj:.12}")?;
    }
    writeln!(out)?;
    writeln!(out, "# encoder q(e|v)")?;
    write_matrix(&mut out, "v", "e", &sol.q_e_given_v)?;
    writeln!(out)?;
    writeln!(out, "# decoder q(c|e)")?;
    write_matrix(&mut out, "e", "c", &sol.q_c_given_e)?;
    writeln!(out)?;
    writeln!(out, "# summary")?;
    writeln!(out, "seed,converged,i_ve,i_ec,objective")?;
    writeln!(
        out,
        "{},{},{:.12},{:.12},{:.12}",
        sol.seed,
        sol.converged,
        sol.i_ve,
        sol.i_ec,
        sol.objective()
    )?;
    writeln!(out)?;
    writeln!(out, "# partition")?;
    writeln!(out, "v,cluster")?;
    for (v, e) in canonical_partition(&sol.hard_assignment())
        .iter()
        .enumerate()
    {
        writeln!(out, "{v},{e}")?;
    }
    Ok(())
}

pub fn lamp_sim(args: LampSimArgs) -> Result<()> {
    let bytes = read_bytes(&args.input)?;
    let mut sim = SimulatorSink::new(1).with_dump(Box::new(io::stdout()));
    sim.receive_bytes(&bytes)?;
    eprintln!(
        "frames={} checksum_errors={} discarded_octets={}",
        sim.frame_count(),
        sim.checksum_error_count(),
        sim.discarded_octets()
    );
    Ok(())
}

pub fn tables_dump(args: TablesDumpArgs) -> Result<()> {
    let text = match args.which {
        Which::Plutchik => PlutchikTable::bundled().to_json(),
        Which::Anchors => PadAnchorTable::bundled().to_json(),
        Which::All => {
            let plutchik: serde_json::Value =
                serde_json::from_str(&PlutchikTable::bundled().to_json())?;
            let anchors: serde_json::Value =
                serde_json::from_str(&PadAnchorTable::bundled().to_json())?;
            serde_json::to_string_pretty(&serde_json::json!({
                "plutchik": plutchik,
                "anchors": anchors,
            }))?
        }
    };
    println!("{text}");
    Ok(())
}
