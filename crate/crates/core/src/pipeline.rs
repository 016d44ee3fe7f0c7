//! End-to-end driver: load or generate a quad mesh, propagate traces, build
//! the T-mesh, quantize arc lengths, extract the coarse block mesh, smooth
//! it, build the requested Lagrange elements, and optionally write every
//! stage to disk.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{debug, info};

use crate::error::{PipelineError, TraceError};
use crate::extraction::{dump_layout, extract, BlockStructuredMesh, CoarseLayout, UnionFind};
use crate::highorder::{build_high_order, export_high_order, HighOrderMesh, HoFormat, Spacing};
use crate::ilp::{
    build_constraints_with, dump_model, dump_quantization, solve, IlpModel, QuantConfig,
    QuantStatus, Quantization, SolveBudget,
};
use crate::mesh::{
    classify_vertices, generate_test_mesh, load_mesh, save_mesh, MeshFormat, MeshSpec, QuadMesh,
};
use crate::smoothing::{
    default_max_iters, default_tol, dump_quality, quality_of, winslow_smooth, GeometryProxy,
    QualityReport,
};
use crate::tmesh::{
    build_tmesh, dump_tmesh, intersection_records, propagate_traces_with, StopRule, TMesh, Trace,
    TraceConfig,
};

#[derive(Debug, Clone)]
pub enum MeshSource {
    Generate(MeshSpec),
    File(PathBuf),
}

impl MeshSource {
    /// Model name for the stats row.
    pub fn label(&self) -> String {
        match self {
            MeshSource::Generate(spec) => spec.name(),
            MeshSource::File(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub source: MeshSource,
    /// Alignment cone half-angle in radians, in [0, pi/4].
    pub alpha: f64,
    /// Lagrange element order, at least 1.
    pub order: usize,
    pub spacing: Spacing,
    pub collapse_35: bool,
    pub stop_rule: StopRule,
    /// Smoothing iteration cap; None picks 100 x layout diameter.
    pub smooth_iters: Option<usize>,
    /// Smoothing convergence tolerance; None picks 1e-3 x mean edge length.
    pub smooth_tol: Option<f64>,
    pub solver: SolveBudget,
    /// Where to write outputs; None writes nothing.
    pub out_dir: Option<PathBuf>,
    /// Also dump every intermediate stage (T-mesh, program, quantization,
    /// layout, quality report, input copy).
    pub dump_all: bool,
}

impl PipelineConfig {
    pub fn new(source: MeshSource) -> PipelineConfig {
        PipelineConfig {
            source,
            alpha: FRAC_PI_4,
            order: 5,
            spacing: Spacing::Equidistant,
            collapse_35: true,
            stop_rule: StopRule::OnePerSide,
            smooth_iters: None,
            smooth_tol: None,
            solver: SolveBudget::default(),
            out_dir: None,
            dump_all: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.alpha.is_finite() || self.alpha < 0.0 || self.alpha > FRAC_PI_4 {
            return Err(PipelineError::Config(format!(
                "alpha must lie in [0, pi/4], got {}",
                self.alpha
            )));
        }
        if self.order < 1 {
            return Err(PipelineError::Config("element order must be at least 1".into()));
        }
        Ok(())
    }
}

/// Wall-clock share of the three reported phases. The remaining time
/// (tracing, extraction, output writing) is unattributed, so the three
/// never sum above 1.
#[derive(Debug, Clone, Copy)]
pub struct PhaseFractions {
    pub load: f64,
    pub ilp: f64,
    pub smooth_ho: f64,
}

#[derive(Debug, Clone)]
pub struct RunStats {
    pub model: String,
    /// Input quad count.
    pub faces: usize,
    /// Patch count of the exhaustively traced input layout.
    pub p_init: usize,
    /// Irregular vertex count of the input.
    pub irr: usize,
    /// Quantization variable count.
    pub vars: usize,
    /// Patch count of the extracted coarse layout.
    pub p_final: usize,
    pub total: Duration,
    pub fractions: PhaseFractions,
}

impl RunStats {
    pub fn csv_header() -> &'static str {
        "model,faces,p_init,irr,vars,p_final,time_s,load_frac,ilp_frac,smooth_ho_frac"
    }

    /// One comma-separated row matching [`RunStats::csv_header`].
    /// The model label is quoted because generator names contain commas.
    pub fn csv_row(&self) -> String {
        format!(
            "\"{}\",{},{},{},{},{},{:.3},{:.3},{:.3},{:.3}",
            self.model.replace('"', "\"\""),
            self.faces,
            self.p_init,
            self.irr,
            self.vars,
            self.p_final,
            self.total.as_secs_f64(),
            self.fractions.load,
            self.fractions.ilp,
            self.fractions.smooth_ho,
        )
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} quads, {} irregular vertices\n\
             input layout {} patches -> coarse layout {} patches (ratio {:.1})\n\
             {} integer variables, {:.3} s total \
             (load {:.0}%, quantize {:.0}%, smooth+elements {:.0}%)",
            self.model,
            self.faces,
            self.irr,
            self.p_init,
            self.p_final,
            self.p_init as f64 / self.p_final as f64,
            self.vars,
            self.total.as_secs_f64(),
            100.0 * self.fractions.load,
            100.0 * self.fractions.ilp,
            100.0 * self.fractions.smooth_ho,
        )
    }
}

/// Everything the run produced, alongside the stats row.
pub struct PipelineOutput {
    pub stats: RunStats,
    pub mesh: QuadMesh,
    pub traces: Vec<Trace>,
    pub tmesh: TMesh,
    pub model: IlpModel,
    pub quant: Quantization,
    pub layout: CoarseLayout,
    /// Smoothed block-structured mesh.
    pub block: BlockStructuredMesh,
    pub smooth_iters: usize,
    pub smooth_converged: bool,
    pub quality: QualityReport,
    pub high_order: HighOrderMesh,
}

/// Patch count of the full quad layout: every separatrix traced until it
/// terminates, no early stopping. Fully regular inputs with no seeds count
/// one patch per connected component.
pub fn compute_input_layout_count(mesh: &QuadMesh) -> usize {
    let classes = classify_vertices(mesh);
    let cfg = TraceConfig { alpha: FRAC_PI_4, stop_rule: StopRule::Never };
    match propagate_traces_with(mesh, &classes, &cfg) {
        Ok(traces) => {
            let tmesh =
                build_tmesh(mesh, &traces).expect("exhaustive layout regions must be quads");
            tmesh.patches.len()
        }
        Err(TraceError::NoSeeds) => connected_components(mesh),
        Err(e) => panic!("exhaustive tracing cannot fail on a valid mesh: {e}"),
    }
}

fn connected_components(mesh: &QuadMesh) -> usize {
    let mut uf = UnionFind::new(mesh.vertex_count());
    for q in mesh.quads() {
        for k in 0..4 {
            uf.union(q[k], q[(k + 1) % 4]);
        }
    }
    let mut roots: Vec<usize> = (0..mesh.vertex_count()).map(|v| uf.find(v)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    if let Ok(threads) = std::env::var("QUADCOARSE_THREADS") {
        match threads.trim().parse::<usize>() {
            Ok(n) if n >= 1 => debug!("QUADCOARSE_THREADS={n} (phases are sequential)"),
            _ => {
                return Err(PipelineError::Config(format!(
                    "QUADCOARSE_THREADS must be a positive integer, got {threads:?}"
                )))
            }
        }
    }
    let t_start = Instant::now();

    let t0 = Instant::now();
    let mesh = match &config.source {
        MeshSource::Generate(spec) => generate_test_mesh(spec)?,
        MeshSource::File(path) => load_mesh(path)?,
    };
    let classes = classify_vertices(&mesh);
    let t_load = t0.elapsed();
    let faces = mesh.quad_count();
    let irr = classes.iter().filter(|c| c.is_irregular()).count();
    info!("loaded {}: {} quads, {} irregular", config.source.label(), faces, irr);

    let p_init = compute_input_layout_count(&mesh);

    let trace_cfg = TraceConfig { alpha: config.alpha, stop_rule: config.stop_rule };
    let traces = propagate_traces_with(&mesh, &classes, &trace_cfg)?;
    let tmesh = build_tmesh(&mesh, &traces)?;
    let ints = intersection_records(&mesh, &tmesh, &traces, config.alpha);

    let t0 = Instant::now();
    let quant_cfg = QuantConfig { collapse_35: config.collapse_35, ..QuantConfig::default() };
    let model = build_constraints_with(&mesh, &tmesh, &traces, &ints, &quant_cfg);
    let quant = solve(&model, &config.solver);
    let t_ilp = t0.elapsed();
    if quant.status == QuantStatus::Infeasible {
        return Err(PipelineError::Ilp(crate::error::IlpError::Infeasible));
    }
    info!(
        "quantization {} over {} variables, objective {}",
        quant.status.label(),
        model.vars(),
        quant.objective_value
    );

    let (layout, block) = extract(&mesh, &tmesh, &quant.q)?;
    let p_final = layout.patches.len();

    let t0 = Instant::now();
    let proxy = GeometryProxy::build(&mesh);
    let iters = config.smooth_iters.unwrap_or_else(|| default_max_iters(&layout));
    let tol = config.smooth_tol.unwrap_or_else(|| default_tol(&block));
    let smooth = winslow_smooth(block, &proxy, iters, tol);
    let quality = quality_of(&smooth.block);
    info!(
        "smoothing {} after {} iterations, min scaled jacobian {:.4}",
        if smooth.converged { "converged" } else { "hit the budget" },
        smooth.iters,
        quality.min
    );
    let high_order =
        build_high_order(&smooth.block, &layout, &proxy, config.order, config.spacing)?;
    let t_smooth_ho = t0.elapsed();

    if let Some(dir) = &config.out_dir {
        write_artifacts(dir, config, &mesh, &tmesh, &model, &quant, &layout, &smooth.block, &quality, &high_order)?;
    }

    let total = t_start.elapsed();
    let frac = |d: Duration| (d.as_secs_f64() / total.as_secs_f64()).min(1.0);
    let stats = RunStats {
        model: config.source.label(),
        faces,
        p_init,
        irr,
        vars: model.vars(),
        p_final,
        total,
        fractions: PhaseFractions {
            load: frac(t_load),
            ilp: frac(t_ilp),
            smooth_ho: frac(t_smooth_ho),
        },
    };
    debug_assert!(stats.p_final >= 1);
    debug_assert!(stats.fractions.load + stats.fractions.ilp + stats.fractions.smooth_ho <= 1.0 + 1e-9);

    Ok(PipelineOutput {
        stats,
        mesh,
        traces,
        tmesh,
        model,
        quant,
        layout,
        block: smooth.block,
        smooth_iters: smooth.iters,
        smooth_converged: smooth.converged,
        quality,
        high_order,
    })
}

#[allow(clippy::too_many_arguments)]
fn write_artifacts(
    dir: &Path,
    config: &PipelineConfig,
    mesh: &QuadMesh,
    tmesh: &TMesh,
    model: &IlpModel,
    quant: &Quantization,
    layout: &CoarseLayout,
    block: &BlockStructuredMesh,
    quality: &QualityReport,
    high_order: &HighOrderMesh,
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    let fine = block.to_quad_mesh()?;
    save_mesh(&fine, &dir.join("fine.obj"), MeshFormat::Obj)?;
    save_mesh(&fine, &dir.join("fine.qm"), MeshFormat::Native)?;
    export_high_order(high_order, &dir.join("high_order.qho"), HoFormat::Native)?;
    if config.order == 1 {
        export_high_order(high_order, &dir.join("high_order.obj"), HoFormat::Obj)?;
    }
    if config.dump_all {
        save_mesh(mesh, &dir.join("input.qm"), MeshFormat::Native)?;
        std::fs::write(dir.join("tmesh.txt"), dump_tmesh(tmesh))?;
        std::fs::write(dir.join("ilp_model.txt"), dump_model(model))?;
        std::fs::write(dir.join("quantization.txt"), dump_quantization(quant))?;
        std::fs::write(dir.join("layout.txt"), dump_layout(layout))?;
        std::fs::write(dir.join("quality.csv"), dump_quality(quality))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
