//! Signal-level subcommands: SH tables, beams, patterns, inference and maps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ambisep_core::beamform::{directivity_index, re_vector, side_lobe_level_db};
use ambisep_core::evaluation::{direction_map, BeamKind};
use ambisep_core::sh::{acn_to_nm, channel_count, sh_normalization};
use ambisep_core::wav::{read_ambisonics, write_mono};
use ambisep_core::{apply_beamformer, beam_pattern, equiangular_grid, sh_eval, AmbisonicsBuffer, Convention, MonoBuffer};
use ambisep_separator::{separate, Checkpoint, ModelParams};

use super::{parse_target, render_labeled, write_text};
use crate::args::{BeamType, BeamformArgs, MapArgs, PatternArgs, SeparateArgs, ShinfoArgs};
use crate::config::{required, resolved_json, usage, write_provenance, CliResult};

pub fn shinfo(a: ShinfoArgs) -> CliResult<()> {
    let order = required(a.order, "order")?;
    let y = match &a.target {
        Some(t) => Some(sh_eval::<f64>(order, &parse_target(t)?)?.into_coeffs()),
        None => {
            if order > ambisep_core::MAX_ORDER {
                return Err(ambisep_core::Error::UnsupportedOrder { order, max: ambisep_core::MAX_ORDER }.into());
            }
            None
        }
    };
    let mut out = String::from(if y.is_some() { "acn,n,m,normalization,y\n" } else { "acn,n,m,normalization\n" });
    for c in 0..channel_count(order) {
        let (n, m) = acn_to_nm(c);
        let _ = write!(out, "{c},{n},{m},{:.12e}", sh_normalization(n, m.unsigned_abs()));
        if let Some(y) = &y {
            let _ = write!(out, ",{:.12e}", y[c]);
        }
        out.push('\n');
    }
    match &a.output {
        Some(path) => {
            write_text(path, &out)?;
            write_provenance(path, "shinfo", 0, resolved_json(&a), std::slice::from_ref(path))
        }
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn read_mix(path: &Path, convention: Option<crate::args::ConventionArg>) -> CliResult<AmbisonicsBuffer<f64>> {
    let fallback = convention.map(Convention::from).unwrap_or(Convention::Orthonormal);
    let mix: AmbisonicsBuffer<f64> = read_ambisonics(path, fallback)?;
    Ok(ambisep_core::convert_convention(&mix, Convention::Orthonormal))
}

fn beam_order(requested: Option<usize>, mix: &AmbisonicsBuffer<f64>) -> CliResult<usize> {
    let order = requested.unwrap_or(mix.order());
    if order > mix.order() {
        return Err(usage(format!("beam order {order} exceeds the input order {}", mix.order())));
    }
    Ok(order)
}

pub fn beamform(a: BeamformArgs) -> CliResult<()> {
    let kind: BeamKind = required(a.kind, "type")?.into();
    let target = parse_target(&required(a.target.clone(), "target")?)?;
    let input = required(a.input.clone(), "input")?;
    let output = required(a.output.clone(), "output")?;
    let mix = read_mix(&input, a.convention)?;
    let order = beam_order(a.order, &mix)?;
    let y = apply_beamformer(&kind.weights::<f64>(order, &target)?, &mix.truncated(order)?)?;
    write_mono(&output, &y)?;
    write_provenance(&output, "beamform", 0, resolved_json(&a), std::slice::from_ref(&output))
}

pub fn pattern(a: PatternArgs) -> CliResult<()> {
    let kind: BeamKind = required(a.kind, "type")?.into();
    let order = required(a.order, "order")?;
    let target = parse_target(a.target.as_deref().unwrap_or(&[0.0, 90.0]))?;
    let output = required(a.output.clone(), "output")?;
    let grid = equiangular_grid(a.n_az.unwrap_or(100), a.n_zen.unwrap_or(50))?;
    let w = kind.weights::<f64>(order, &target)?;
    let peak = beam_pattern(&w, &target).abs();
    let mut out = String::from("azimuth_deg,zenith_deg,gain,gain_db\n");
    for d in grid.iter() {
        let g = beam_pattern(&w, d);
        let db = 20.0 * (g.abs() / peak).max(1e-10).log10();
        let _ = writeln!(out, "{:.4},{:.4},{:.10},{:.4}", d.azimuth_deg(), d.zenith_deg(), g, db);
    }
    write_text(&output, &out)?;
    let re = re_vector(&w)?;
    let probes = equiangular_grid(200, 100)?;
    println!(
        "order {order} {}: DI {:.4} dB, |rE| {:.6}, side lobe {:.2} dB",
        match kind {
            BeamKind::MaxDi => "max-di",
            BeamKind::MaxRe => "max-re",
        },
        directivity_index(&w)?,
        (re[0] * re[0] + re[1] * re[1] + re[2] * re[2]).sqrt(),
        side_lobe_level_db(&w, probes.directions())
    );
    write_provenance(&output, "pattern", 0, resolved_json(&a), std::slice::from_ref(&output))
}

fn load_network(path: &Path) -> CliResult<ModelParams<f64>> {
    let ck = Checkpoint::load(path).map_err(|e| crate::config::CliError::Data(anyhow::anyhow!("{}: {e}", path.display())))?;
    Ok(ck.params.cast())
}

pub fn separate_cmd(a: SeparateArgs) -> CliResult<()> {
    let params = load_network(&required(a.checkpoint.clone(), "checkpoint")?)?;
    let target = parse_target(&required(a.target.clone(), "target")?)?;
    let input = required(a.input.clone(), "input")?;
    let output = required(a.output.clone(), "output")?;
    let mix = read_mix(&input, a.convention)?;
    let order = params.config.order;
    if mix.order() < order {
        return Err(usage(format!("the network needs order {order} but the input has order {}", mix.order())));
    }
    let y = separate(&params, &mix.truncated(order)?, &target)?;
    write_mono(&output, &y)?;
    write_provenance(&output, "separate", 0, resolved_json(&a), std::slice::from_ref(&output))
}

pub fn map(a: MapArgs) -> CliResult<()> {
    let output = required(a.output.clone(), "output")?;
    let (mix, truths) = match (&a.input, &a.manifest) {
        (Some(input), None) => (read_mix(input, a.convention)?, Vec::new()),
        (None, Some(manifest)) => {
            let corpus = required(a.corpus.clone(), "corpus")?;
            let index = required(a.scene, "scene")?;
            let scene = render_labeled::<f64>(&corpus, manifest, Some(index))?.pop().expect("one scene");
            let truths: Vec<MonoBuffer<f64>> = scene.truths.iter().zip(&scene.active).filter(|(_, &a)| a).map(|(t, _)| t.clone()).collect();
            (scene.mixture, truths)
        }
        _ => return Err(usage("give exactly one of --input and --manifest")),
    };
    let grid = equiangular_grid(a.n_az.unwrap_or(100), a.n_zen.unwrap_or(50))?;
    let map = match (&a.checkpoint, a.kind) {
        (Some(ck), None) => {
            let params = load_network(ck)?;
            let order = params.config.order;
            if mix.order() < order {
                return Err(usage(format!("the network needs order {order} but the mixture has order {}", mix.order())));
            }
            let mix = mix.truncated(order)?;
            direction_map(|d| separate(&params, &mix, d), &grid, &truths)?
        }
        (None, kind) => {
            let kind: BeamKind = kind.unwrap_or(BeamType::MaxRe).into();
            let order = beam_order(a.order, &mix)?;
            let mix = mix.truncated(order)?;
            direction_map(|d| apply_beamformer(&kind.weights::<f64>(order, d)?, &mix), &grid, &truths)?
        }
        (Some(_), Some(_)) => return Err(usage("give either --checkpoint or --type, not both")),
    };
    write_text(&output, &map.to_csv())?;
    write_provenance(&output, "map", 0, resolved_json(&a), std::slice::from_ref(&output))
}

pub(super) fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p)?;
    }
    Ok(())
}
