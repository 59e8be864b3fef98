//! Implementations behind the `loopnerve` binary: analyze a pair, verify
//! the structural lemmas and homology theorems over a corpus, sample the
//! rank distribution, emit the weight spectrum, and export the complex.
//!
//! Exit codes: 0 success, 1 input/parse errors, 2 failed verification or
//! a theorem violation, 3 I/O failures.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::homology::{
    boundary_matrices, euler_characteristic, generator_support, homology,
    persistence_spectrum, ChainComplex, FilteredHomology, HomologyResult, SpectrumError,
    TheoremViolation,
};
use crate::nerve::{
    build_nerve, delta_graph_exists, export_complex_text, loop_table_json,
    verify_structure_lemmas, DeltaCertificate, LoopId, NerveComplex,
};
use crate::oracle;
use crate::structures::{
    instance_rng, read_arc_json, read_bis, BiSecondaryStructure, Owner, Sampler,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Theorem(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Theorem(_) | CliError::VerifyFailed(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<TheoremViolation> for CliError {
    fn from(v: TheoremViolation) -> Self {
        CliError::Theorem(v.to_string())
    }
}

impl From<SpectrumError> for CliError {
    fn from(v: SpectrumError) -> Self {
        CliError::Theorem(v.to_string())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Complex,
    Loops,
}

/// Read a pair from a `.bis` file (or arc-list JSON when the extension is
/// `.json`).
pub fn read_input(path: &Path) -> Result<BiSecondaryStructure, CliError> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        read_arc_json(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    } else {
        read_bis(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

/// Everything the reporting commands need about one pair.
pub struct Analysis {
    pub nerve: NerveComplex,
    pub cc: ChainComplex,
    pub homology: HomologyResult,
    pub spectrum: FilteredHomology,
}

pub fn analyze_pair(r: &BiSecondaryStructure) -> Result<Analysis, CliError> {
    let nerve = build_nerve(r);
    let cc = boundary_matrices(&nerve, nerve.default_order());
    let homology = homology(&cc)?;
    let spectrum = persistence_spectrum(&nerve)?;
    Ok(Analysis { nerve, cc, homology, spectrum })
}

#[derive(Serialize)]
struct GenTermJson {
    simplex: Vec<usize>,
    coeff: i64,
}

#[derive(Serialize)]
struct LoopRefJson {
    id: usize,
    max_arc: [usize; 2],
}

#[derive(Serialize)]
struct SupportJson {
    s_loops: Vec<LoopRefJson>,
    t_loops: Vec<LoopRefJson>,
}

#[derive(Serialize)]
struct HomologyJson {
    betti: [usize; 4],
    torsion: [Vec<i64>; 4],
    h2_rank: usize,
    euler: i64,
    generators: Vec<Vec<GenTermJson>>,
    levels: BTreeMap<usize, [usize; 4]>,
    bars: BTreeMap<usize, Vec<[usize; 2]>>,
    supports: Vec<SupportJson>,
}

fn support_json(analysis: &Analysis) -> Vec<SupportJson> {
    analysis
        .homology
        .h2_generators
        .iter()
        .map(|gen| {
            let report = generator_support(gen, &analysis.cc, &analysis.nerve);
            let as_json = |entries: &[crate::homology::SupportEntry]| {
                entries
                    .iter()
                    .map(|e| LoopRefJson {
                        id: e.id.0,
                        max_arc: [e.max_arc.start, e.max_arc.end],
                    })
                    .collect()
            };
            SupportJson { s_loops: as_json(&report.s_loops), t_loops: as_json(&report.t_loops) }
        })
        .collect()
}

/// The homology report as JSON; key layout is stable and maps are sorted,
/// so repeated runs are byte-identical.
pub fn homology_json(analysis: &Analysis) -> String {
    let generators = analysis
        .homology
        .h2_generators
        .iter()
        .map(|gen| {
            gen.iter()
                .map(|(idx, coeff)| GenTermJson {
                    simplex: analysis.cc.basis(2)[*idx].iter().map(|id| id.0).collect(),
                    coeff: coeff.to_i64().expect("reduced generator coefficient fits i64"),
                })
                .collect()
        })
        .collect();
    let torsion = [0, 1, 2, 3].map(|d| {
        analysis.homology.torsion[d]
            .iter()
            .map(|v| v.to_i64().expect("torsion factor fits i64"))
            .collect()
    });
    let bars: BTreeMap<usize, Vec<[usize; 2]>> = (0..4)
        .map(|d| {
            (d, analysis.spectrum.bars[d].iter().map(|&(b, e)| [b, e]).collect())
        })
        .collect();
    let doc = HomologyJson {
        betti: analysis.homology.betti,
        torsion,
        h2_rank: analysis.homology.h2_rank(),
        euler: analysis.homology.euler,
        generators,
        levels: analysis.spectrum.levels.clone(),
        bars,
        supports: support_json(analysis),
    };
    serde_json::to_string_pretty(&doc).expect("homology report serializes")
}

pub fn summary_line(r: &BiSecondaryStructure, h: &HomologyResult) -> String {
    let [b0, b1, b2, b3] = h.betti;
    format!("n={} betti=({b0},{b1},{b2},{b3}) h2_rank={}", r.n(), h.h2_rank())
}

pub struct AnalyzeOpts {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub fn cmd_analyze(opts: &AnalyzeOpts) -> Result<(), CliError> {
    let r = read_input(&opts.input)?;
    let analysis = analyze_pair(&r)?;
    let json = homology_json(&analysis);
    if let Some(path) = &opts.output {
        fs::write(path, &json)?;
    }
    let summary = summary_line(&r, &analysis.homology);
    match opts.format {
        Format::Text => {
            println!("{summary}");
            for (i, gen) in analysis.homology.h2_generators.iter().enumerate() {
                let support = generator_support(gen, &analysis.cc, &analysis.nerve);
                let arcs = |entries: &[crate::homology::SupportEntry]| -> String {
                    entries
                        .iter()
                        .map(|e| format!("({},{})", e.max_arc.start, e.max_arc.end))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                println!(
                    "generator {i}: S arcs {} | T arcs {}",
                    arcs(&support.s_loops),
                    arcs(&support.t_loops)
                );
            }
        }
        Format::Json => {
            eprintln!("{summary}");
            println!("{json}");
        }
        _ => {
            return Err(CliError::Parse(
                "analyze supports --format text or json".to_string(),
            ))
        }
    }
    Ok(())
}

pub struct SpectrumOpts {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn spectrum_table(spectrum: &FilteredHomology) -> String {
    let mut out = String::new();
    for (&t, betti) in spectrum.levels.iter().rev() {
        let [b0, b1, b2, b3] = betti;
        writeln!(out, "{t} {b0} {b1} {b2} {b3}").unwrap();
    }
    out
}

fn bars_text(spectrum: &FilteredHomology) -> String {
    let mut out = String::new();
    for d in 0..4 {
        for &(birth, death) in &spectrum.bars[d] {
            writeln!(out, "{d} {birth} {death}").unwrap();
        }
    }
    out
}

pub fn cmd_spectrum(opts: &SpectrumOpts) -> Result<(), CliError> {
    let r = read_input(&opts.input)?;
    let nerve = build_nerve(&r);
    let spectrum = persistence_spectrum(&nerve)?;
    match opts.format {
        Format::Text => {
            let table = spectrum_table(&spectrum);
            let bars = bars_text(&spectrum);
            if let Some(path) = &opts.output {
                fs::write(path, &table)?;
                let bars_path = PathBuf::from(format!("{}.bars", path.display()));
                fs::write(bars_path, &bars)?;
            } else {
                print!("{table}");
                println!();
                print!("{bars}");
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct SpectrumJson {
                levels: BTreeMap<usize, [usize; 4]>,
                bars: BTreeMap<usize, Vec<[usize; 2]>>,
            }
            let doc = SpectrumJson {
                levels: spectrum.levels.clone(),
                bars: (0..4)
                    .map(|d| (d, spectrum.bars[d].iter().map(|&(b, e)| [b, e]).collect()))
                    .collect(),
            };
            let json = serde_json::to_string_pretty(&doc).expect("spectrum serializes");
            if let Some(path) = &opts.output {
                fs::write(path, &json)?;
            } else {
                println!("{json}");
            }
        }
        _ => {
            return Err(CliError::Parse(
                "spectrum supports --format text or json".to_string(),
            ))
        }
    }
    Ok(())
}

pub struct ExportOpts {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub fn cmd_export(opts: &ExportOpts) -> Result<(), CliError> {
    let r = read_input(&opts.input)?;
    let nerve = build_nerve(&r);
    let body = match opts.format {
        Format::Complex => export_complex_text(&nerve),
        Format::Loops => {
            let mut json = loop_table_json(&nerve);
            json.push('\n');
            json
        }
        _ => {
            return Err(CliError::Parse(
                "export supports --format complex or loops".to_string(),
            ))
        }
    };
    match &opts.output {
        Some(path) => fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

/// Histogram of second-homology ranks over sampled pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankHistogram {
    pub bins: BTreeMap<usize, usize>,
    pub total: usize,
    pub n: usize,
    pub min_gap: usize,
    pub seed: u64,
}

impl RankHistogram {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Params {
            n: usize,
            min_gap: usize,
            seed: u64,
        }
        #[derive(Serialize)]
        struct HistogramJson {
            params: Params,
            total: usize,
            bins: BTreeMap<usize, usize>,
        }
        let doc = HistogramJson {
            params: Params { n: self.n, min_gap: self.min_gap, seed: self.seed },
            total: self.total,
            bins: self.bins.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("histogram serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("rank count frequency\n");
        for (rank, count) in &self.bins {
            writeln!(out, "{rank} {count} {:.4}", *count as f64 / self.total as f64)
                .unwrap();
        }
        out
    }

    pub fn frequency(&self, rank: usize) -> f64 {
        *self.bins.get(&rank).unwrap_or(&0) as f64 / self.total as f64
    }
}

/// Sample `count` independent uniform pairs and record the second
/// homology rank of each. Instance `i` draws S then T from a stream keyed
/// by `(seed, i)`, so results do not depend on evaluation order.
pub fn rank_histogram(
    n: usize,
    count: usize,
    seed: u64,
    min_gap: usize,
) -> Result<RankHistogram, CliError> {
    let sampler = Sampler::new(n, min_gap);
    let mut bins: BTreeMap<usize, usize> = BTreeMap::new();
    for idx in 0..count {
        let mut rng = instance_rng(seed, idx as u64);
        let s = sampler.sample(&mut rng);
        let t = sampler.sample(&mut rng);
        let r = BiSecondaryStructure::new(s, t).expect("sampled pair shares n");
        let nerve = build_nerve(&r);
        let cc = boundary_matrices(&nerve, nerve.default_order());
        let h = homology(&cc)?;
        *bins.entry(h.h2_rank()).or_insert(0) += 1;
    }
    Ok(RankHistogram { bins, total: count, n, min_gap, seed })
}

pub struct SampleOpts {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub min_gap: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub fn cmd_sample(opts: &SampleOpts) -> Result<(), CliError> {
    if opts.count == 0 {
        return Err(CliError::Parse("--count must be at least 1".to_string()));
    }
    let hist = rank_histogram(opts.n, opts.count, opts.seed, opts.min_gap)?;
    let json = hist.to_json();
    if let Some(path) = &opts.output {
        fs::write(path, &json)?;
    }
    match opts.format {
        Format::Text => print!("{}", hist.to_table()),
        Format::Json => println!("{json}"),
        _ => {
            return Err(CliError::Parse(
                "sample supports --format text or json".to_string(),
            ))
        }
    }
    Ok(())
}

pub struct VerifyOpts {
    pub input: Option<PathBuf>,
    pub random: Option<usize>,
    pub n: usize,
    pub seed: u64,
    pub min_gap: usize,
    pub oracle: bool,
    pub swapped_delta: bool,
    pub output: Option<PathBuf>,
}

#[derive(Default)]
struct CheckTable {
    rows: Vec<(String, usize, usize)>,
}

impl CheckTable {
    fn bump(&mut self, name: &str, pass: bool) {
        match self.rows.iter_mut().find(|(n, _, _)| n == name) {
            Some(row) => {
                row.1 += pass as usize;
                row.2 += 1;
            }
            None => self.rows.push((name.to_string(), pass as usize, 1)),
        }
    }
}

fn gather_instances(
    opts: &VerifyOpts,
) -> Result<Vec<(String, BiSecondaryStructure)>, CliError> {
    if let Some(dir) = &opts.input {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "bis"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(CliError::Parse(format!(
                "no .bis files found in {}",
                dir.display()
            )));
        }
        paths
            .into_iter()
            .map(|p| Ok((p.display().to_string(), read_input(&p)?)))
            .collect()
    } else if let Some(count) = opts.random {
        if count == 0 {
            return Err(CliError::Parse("--random must be at least 1".to_string()));
        }
        let sampler = Sampler::new(opts.n, opts.min_gap);
        Ok((0..count)
            .map(|idx| {
                let mut rng = instance_rng(opts.seed, idx as u64);
                let s = sampler.sample(&mut rng);
                let t = sampler.sample(&mut rng);
                (
                    format!("random-{idx}"),
                    BiSecondaryStructure::new(s, t).expect("sampled pair shares n"),
                )
            })
            .collect())
    } else {
        Err(CliError::Parse(
            "verify needs --input DIR or --random N".to_string(),
        ))
    }
}

fn certificate_text(nerve: &NerveComplex, center: LoopId) -> String {
    match delta_graph_exists(nerve, center).certificate {
        DeltaCertificate::SpanningTree(tree) => {
            let edges: Vec<String> =
                tree.iter().map(|(a, b)| format!("{}-{}", a.0, b.0)).collect();
            format!("delta t={} tree=[{}]", center.0, edges.join(","))
        }
        DeltaCertificate::Components(comps) => {
            format!("delta t={} DISCONNECTED components={comps:?}", center.0)
        }
    }
}

pub fn cmd_verify(opts: &VerifyOpts) -> Result<(), CliError> {
    let corpus_mode = opts.input.is_some();
    let instances = gather_instances(opts)?;
    let mut table = CheckTable::default();
    let mut swapped = (0usize, 0usize);
    let mut failure: Option<(String, BiSecondaryStructure)> = None;

    for (label, r) in &instances {
        let nerve = build_nerve(r);
        let mut instance_ok = true;

        let report = verify_structure_lemmas(&nerve);
        for check in &report.checks {
            table.bump(check.name, check.passed());
            if !check.passed() {
                instance_ok = false;
            }
        }

        let t_loops: Vec<LoopId> =
            (nerve.s_loop_count()..nerve.loop_count()).map(LoopId).collect();
        let delta_ok =
            t_loops.iter().all(|&id| delta_graph_exists(&nerve, id).connected);
        table.bump("delta-t-connected", delta_ok);
        instance_ok &= delta_ok;

        if corpus_mode {
            for &id in &t_loops {
                println!("{label}: {}", certificate_text(&nerve, id));
            }
        }

        let cc = boundary_matrices(&nerve, nerve.default_order());
        let hres = homology(&cc);
        table.bump("homology-theorems", hres.is_ok());
        let euler_ok = match &hres {
            Ok(h) => h.betti[2] as i64 == euler_characteristic(&nerve) - 1,
            Err(_) => false,
        };
        table.bump("euler-identity", euler_ok);
        instance_ok &= hres.is_ok() && euler_ok;

        if opts.oracle {
            let nerve_ok = oracle::nerve_matches_brute_force(&nerve).is_ok();
            table.bump("oracle-nerve", nerve_ok);
            let betti_ok = match &hres {
                Ok(h) => h.betti == oracle::rational_betti(&cc),
                Err(_) => false,
            };
            table.bump("oracle-betti", betti_ok);
            instance_ok &= nerve_ok && betti_ok;
        }

        if opts.swapped_delta {
            let s_ok = (0..nerve.s_loop_count())
                .all(|id| delta_graph_exists(&nerve, LoopId(id)).connected);
            swapped.0 += s_ok as usize;
            swapped.1 += 1;
        }

        if !instance_ok && failure.is_none() {
            failure = Some((label.clone(), r.clone()));
            break;
        }
    }

    for (name, pass, total) in &table.rows {
        println!("check {name}: {pass}/{total}");
    }
    if opts.swapped_delta {
        println!("swapped-delta: {}/{} (informational)", swapped.0, swapped.1);
    }

    match failure {
        Some((label, r)) => {
            let path = opts
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from("counterexample.bis"));
            fs::write(&path, r.to_bis())?;
            Err(CliError::VerifyFailed(format!(
                "{label}: counterexample written to {}",
                path.display()
            )))
        }
        None => {
            println!("RESULT: PASS ({} instances)", instances.len());
            Ok(())
        }
    }
}

/// Count of S-loops and T-loops whose swapped-role delta graph is
/// connected; the swapped direction is measured, not asserted.
pub fn swapped_delta_counts(nerve: &NerveComplex) -> (usize, usize) {
    let mut connected = 0;
    let mut total = 0;
    for id in 0..nerve.loop_count() {
        if nerve.owner(LoopId(id)) == Owner::S {
            total += 1;
            connected += delta_graph_exists(nerve, LoopId(id)).connected as usize;
        }
    }
    (connected, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::read_bis;

    #[test]
    fn exit_codes_follow_the_documented_mapping() {
        assert_eq!(CliError::Parse("x".into()).exit_code(), 1);
        assert_eq!(CliError::Theorem("x".into()).exit_code(), 2);
        assert_eq!(CliError::VerifyFailed("x".into()).exit_code(), 2);
        let io = CliError::Io(std::io::Error::other("x"));
        assert_eq!(io.exit_code(), 3);
        let violation = TheoremViolation {
            dimension: 1,
            betti: [1, 1, 0, 0],
            ranks: [1, 0, 0],
            has_torsion: false,
        };
        assert_eq!(CliError::from(violation).exit_code(), 2);
    }

    #[test]
    fn summary_line_format() {
        let r = read_bis("(.).\n.(.)\n").unwrap();
        let analysis = analyze_pair(&r).unwrap();
        assert_eq!(
            summary_line(&r, &analysis.homology),
            "n=4 betti=(1,0,1,0) h2_rank=1"
        );
    }

    #[test]
    fn histogram_of_length_zero_pairs() {
        let hist = rank_histogram(0, 5, 1, 0).unwrap();
        assert_eq!(hist.bins.len(), 1);
        assert_eq!(hist.bins[&0], 5);
        assert_eq!(hist.frequency(0), 1.0);
        assert!(hist.to_table().contains("0 5 1.0000"));
    }

    #[test]
    fn swapped_delta_counts_on_golden_instance() {
        let r = read_bis("(.).\n.(.)\n").unwrap();
        let nerve = build_nerve(&r);
        let (connected, total) = swapped_delta_counts(&nerve);
        assert_eq!(total, 2);
        assert_eq!(connected, 2);
    }
}
