use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use fock::combinadics::{fermion_rank, Address, HoleVector};
use fock::executor::{parallel_densities, resolve_workers};
use fock::fockspace::Statistics;
use fock::kernel::ApplyOptions;
use fock::mixtures::apply_mixture_hamiltonian_with;
use fock::observables::mixture_densities;
use fock::oracle::{dense_eig, DENSE_CAP};
use fock::solvers::{lanczos_ground_state, propagate_operator, LanczosOptions, PropagationOptions};
use fock::{Error, Result};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::{ApplyArgs, EnumArgs, GsArgs, PropArgs, RunArgs};
use crate::model::{parse_literal, Model, State};

pub const GS_FORMAT: &str = "fock-gs/1";
pub const PROP_FORMAT: &str = "fock-prop/1";
pub const APPLY_FORMAT: &str = "fock-apply/1";

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn complex(c: Complex64) -> Value {
    json!({ "re": c.re, "im": c.im })
}

fn l2_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

struct Prepared {
    model: Model,
    workers: usize,
}

fn prepare(run: &RunArgs) -> Result<Prepared> {
    let workers = resolve_workers(run.workers)?;
    let model = Model::load(&run.file, &run.space)?;
    if run.oracle && model.dim() > DENSE_CAP {
        return Err(Error::TooLarge {
            dim: model.dim(),
            cap: DENSE_CAP,
        });
    }
    Ok(Prepared { model, workers })
}

pub fn cmd_enum(args: &EnumArgs) -> Result<String> {
    let space = args.space.single_space()?;
    let mut out = String::new();
    if let Some(holes) = &args.holes {
        if space.statistics() != Statistics::Fermion {
            return Err(Error::InvalidArgument("--holes applies to fermions".into()));
        }
        let hv = HoleVector::new(holes.clone(), space.orbitals())?;
        if hv.len() != space.holes() {
            return Err(Error::InvalidConfiguration(format!(
                "{} holes given, {space} has {}",
                hv.len(),
                space.holes()
            )));
        }
        writeln!(out, "{}", fermion_rank(&hv, &space)?.get()).unwrap();
    } else if let Some(text) = &args.occ {
        let occ = parse_literal(&space, text)?;
        writeln!(out, "{}", space.rank(&occ)?.get()).unwrap();
    } else if let Some(j) = args.address {
        let j = Address::new(j).ok_or(Error::AddressOutOfRange {
            address: 0,
            dim: space.dim() as u64,
        })?;
        let occ = space.unrank(j)?;
        writeln!(out, "{}", render(space.statistics(), occ.as_slice())).unwrap();
    } else {
        for (j, c) in space.configurations() {
            writeln!(out, "{} {}", j.get(), c.render(space.orbitals())).unwrap();
        }
    }
    Ok(out)
}

fn render(stats: Statistics, occ: &[u32]) -> String {
    let body: Vec<String> = occ.iter().map(u32::to_string).collect();
    match stats {
        Statistics::Fermion => format!("|{}⟩", body.concat()),
        Statistics::Boson => format!("|{}⟩", body.join(",")),
    }
}

pub fn cmd_gs(args: &GsArgs) -> Result<String> {
    let Prepared { model, workers } = prepare(&args.run)?;
    let options = LanczosOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        seed: args.run.seed,
        ..LanczosOptions::default()
    };
    let gs = lanczos_ground_state(model.operator(workers).as_ref(), &options)?;
    let state = model.wrap(gs.vector.clone())?;

    let mut report = json!({
        "format": GS_FORMAT,
        "dim": model.dim(),
        "energy": gs.energy,
        "residual": gs.residual,
        "iterations": gs.matvecs,
        "restarts": gs.restarts,
        "workers": workers,
        "seed": args.run.seed,
    });
    match (&model, &state) {
        (Model::Single(spec), State::Single(psi)) => {
            let (rho1, rho2, _) = parallel_densities(spec, psi, workers)?;
            report["natural_occupations"] = json!(rho1.natural_occupations());
            if args.densities {
                report["rho1"] = rho1.to_json_value();
                report["rho2"] = rho2.to_json_value();
            }
        }
        (_, State::Mixture(psi)) => {
            let (ra, rb) = mixture_densities(psi)?;
            report["natural_occupations"] = json!({
                "a": ra.natural_occupations(),
                "b": rb.natural_occupations(),
            });
            if args.densities {
                report["rho1"] = json!({ "a": ra.to_json_value(), "b": rb.to_json_value() });
            }
        }
        (Model::Mixture(_), State::Single(_)) => unreachable!("wrap follows the model"),
    }
    if args.run.oracle {
        let spectrum = dense_eig(&model.dense()?)?;
        let exact = spectrum.eigenvalues[0];
        report["oracle"] = json!({
            "energy": exact,
            "max_deviation": (gs.energy - exact).abs(),
        });
    }
    if let Some(path) = &args.save_state {
        std::fs::write(path, state.to_bytes())?;
    }
    let mut text = serde_json::to_string_pretty(&report).expect("plain data serializes");
    text.push('\n');
    emit(args.run.out.as_deref(), &text)?;
    Ok(String::new())
}

pub fn cmd_prop(args: &PropArgs) -> Result<String> {
    let Prepared { model, workers } = prepare(&args.run)?;
    let psi0 = match (&args.init, &args.state) {
        (Some(lit), _) => model.basis_state(lit)?,
        (None, Some(path)) => model.read_state(path)?,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "an initial state is required".into(),
            ))
        }
    };
    let options = PropagationOptions {
        t_final: args.t_final,
        dt: args.dt,
        krylov_dim: args.krylov_dim,
        err_tol: args.tol,
        snapshots: args.run.oracle,
        ..PropagationOptions::default()
    };
    let table = model.occupation_table();
    let op = model.operator(workers);
    let res = propagate_operator(op.as_ref(), psi0.amplitudes(), &options, |_, amps| {
        table.expectations(amps)
    })?;

    let deviations = if args.run.oracle {
        let spectrum = dense_eig(&model.dense()?)?;
        res.times
            .iter()
            .zip(&res.snapshots)
            .map(|(&t, snap)| l2_distance(&spectrum.propagate(psi0.amplitudes(), t), snap))
            .collect()
    } else {
        Vec::new()
    };

    let mut csv = format!("# {PROP_FORMAT}\ntime,norm,energy");
    for label in model.occupation_labels() {
        csv.push(',');
        csv.push_str(&label);
    }
    if args.run.oracle {
        csv.push_str(",oracle_dev");
    }
    csv.push('\n');
    for i in 0..res.times.len() {
        write!(csv, "{},{},{}", res.times[i], res.norms[i], res.energies[i]).unwrap();
        for x in &res.observables[i] {
            write!(csv, ",{x}").unwrap();
        }
        if let Some(d) = deviations.get(i) {
            write!(csv, ",{d}").unwrap();
        }
        csv.push('\n');
    }
    if let Some(path) = &args.final_state {
        std::fs::write(path, model.wrap(res.final_state.clone())?.to_bytes())?;
    }
    emit(args.run.out.as_deref(), &csv)?;
    Ok(String::new())
}

pub fn cmd_apply(args: &ApplyArgs) -> Result<String> {
    let Prepared { model, workers } = prepare(&args.run)?;
    let psi = model.read_state(&args.input)?;
    let options = ApplyOptions {
        workers,
        ..ApplyOptions::default()
    };
    let h_psi = match (&model, &psi) {
        (Model::Single(spec), State::Single(v)) => {
            State::Single(fock::kernel::apply_hamiltonian_with(spec, v, &options)?)
        }
        (Model::Mixture(h), State::Mixture(v)) => {
            State::Mixture(apply_mixture_hamiltonian_with(h, v, &options)?)
        }
        _ => unreachable!("read_state checks the space"),
    };
    let expectation = fock::fockspace::dot_slice(psi.amplitudes(), h_psi.amplitudes());
    let mut report = json!({
        "format": APPLY_FORMAT,
        "dim": model.dim(),
        "expectation": complex(expectation),
        "norm": fock::fockspace::norm_sqr(psi.amplitudes()).sqrt(),
        "workers": workers,
    });
    if args.run.oracle {
        let dense = model.dense()?.matvec(psi.amplitudes());
        let dev = dense
            .iter()
            .zip(h_psi.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        report["oracle"] = json!({ "max_deviation": dev });
    }
    if let Some(path) = &args.run.out {
        std::fs::write(path, h_psi.to_bytes())?;
    }
    let mut text = serde_json::to_string(&report).expect("plain data serializes");
    text.push('\n');
    Ok(text)
}
