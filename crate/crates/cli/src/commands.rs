use std::path::{Path, PathBuf};

use emrkit_core::{
    has_errors, parse_emr, repair as repair_source, statement_lines, validate, ApiCatalog, EmrAst, Severity,
    StatementClass,
};
use emrkit_grader::{
    emr_size_stats, load_annotations, load_emr_dir, load_survey, summarize_annotations, summarize_survey,
};
use emrkit_llm::{
    builtin_fewshot, derive_mrs, generate_emrs, ingest_document, load_fewshot, merge_mrs, ChatClient, EmrStatus,
    LiveClient, MetamorphicRelation, MockClient, Templates, TranscriptStore,
};
use emrkit_runtime::{builtin_inputs, run_suite, shop_stubs, NamedInput, StubBindings, VerdictValue};
use emrkit_sut::{build_factory, load_api_catalog, load_input, Fault, SutConfig};
use serde::Serialize;

use crate::config::{StubSet, ToolConfig};
use crate::exit::{CliError, Exit};
use crate::output::{file_stem, json, write};

pub struct Context {
    pub config: ToolConfig,
    pub verbose: bool,
}

impl Context {
    fn note(&self, message: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", message.as_ref());
        }
    }

    fn out(&self, rel: &str) -> PathBuf {
        self.config.out.join(rel)
    }

    fn client(&self) -> Result<Box<dyn ChatClient>, CliError> {
        if self.config.mock {
            let path = self.config.mock_scripts.as_ref().ok_or_else(|| {
                CliError::new(Exit::Input, "--mock needs a script file (--scripts or mock_scripts in the config)")
            })?;
            Ok(Box::new(MockClient::load(path)?))
        } else {
            Ok(Box::new(LiveClient::new(&self.config.llm)?))
        }
    }

    fn templates(&self) -> Result<Templates, CliError> {
        Ok(match &self.config.templates {
            Some(dir) => Templates::load(dir)?,
            None => Templates::builtin(),
        })
    }

    fn catalog(&self, flag: Option<&Path>) -> Result<ApiCatalog, CliError> {
        match flag.or(self.config.catalog.as_deref()) {
            Some(path) => load_api_catalog(path).map_err(|e| CliError::new(Exit::Input, e.to_string())),
            None => Ok(ApiCatalog::empty()),
        }
    }

    fn store(&self) -> Result<TranscriptStore, CliError> {
        TranscriptStore::new(self.out("transcripts")).map_err(|e| CliError::new(Exit::Internal, e.to_string()))
    }
}

#[derive(Serialize)]
struct DocumentSummary {
    path: PathBuf,
    document: String,
    transcript: String,
    sentences: Vec<String>,
    flagged: Vec<emrkit_llm::FlaggedSentence>,
    mrs: usize,
}

fn derive_stage(
    ctx: &Context,
    docs: &[PathBuf],
    allow_empty: bool,
    client: &mut dyn ChatClient,
) -> Result<(Vec<MetamorphicRelation>, Exit), CliError> {
    let documents = docs
        .iter()
        .map(|p| ingest_document(p).map_err(|e| CliError::new(Exit::Input, e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let templates = ctx.templates()?;
    let store = ctx.store()?;
    let mut lists = Vec::new();
    let mut summaries = Vec::new();
    let mut exit = Exit::Ok;
    for (path, doc) in docs.iter().zip(&documents) {
        ctx.note(format!("deriving MRs from {} ({})", path.display(), doc.short_id()));
        let out = derive_mrs(doc, &ctx.config.llm, &templates, client, Some(&store))?;
        for f in &out.flagged {
            eprintln!("warning: {}: quoted sentence not found in the document: {}", path.display(), f.sentence);
        }
        println!("{}: {} MR(s)", path.display(), out.mrs.len());
        if out.mrs.is_empty() && !allow_empty {
            exit = Exit::NothingProduced;
        }
        summaries.push(DocumentSummary {
            path: path.clone(),
            document: doc.id.clone(),
            transcript: format!("{}.json", out.conversation.id),
            sentences: out.sentences,
            flagged: out.flagged,
            mrs: out.mrs.len(),
        });
        lists.push(out.mrs);
    }
    let mrs = merge_mrs(lists, ctx.config.llm.dedupe_mrs);
    write(&ctx.out("mrs.json"), &json(&mrs))?;
    write(&ctx.out("derive.json"), &json(&summaries))?;
    if exit != Exit::Ok {
        eprintln!("error: a document yielded no MR (use --allow-empty to accept)");
    }
    Ok((mrs, exit))
}

fn generate_stage(
    ctx: &Context,
    mrs: &[MetamorphicRelation],
    catalog: &ApiCatalog,
    client: &mut dyn ChatClient,
) -> Result<Exit, CliError> {
    if mrs.is_empty() {
        println!("no MRs to convert");
        return Ok(Exit::Ok);
    }
    let fewshot = match &ctx.config.fewshot {
        Some(dir) => load_fewshot(dir)?,
        None => builtin_fewshot(),
    };
    let templates = ctx.templates()?;
    let store = ctx.store()?;
    ctx.note(format!("converting {} MR(s)", mrs.len()));
    let out = generate_emrs(mrs, catalog, &fewshot, &ctx.config.llm, &templates, client, Some(&store))?;
    for emr in &out.emrs {
        let stem = file_stem(&emr.mr);
        let dir = ctx.out("emrs");
        match emr.status {
            EmrStatus::Unparseable => {
                write(&dir.join(format!("{stem}.unparseable.txt")), &emr.source)?;
            }
            _ => {
                let mut source = emr.source.clone();
                if !source.ends_with('\n') {
                    source.push('\n');
                }
                write(&dir.join(format!("{stem}.smrl")), &source)?;
                write(&dir.join(format!("{stem}.stubs.json")), &json(&emr.stubs))?;
            }
        }
        write(&dir.join(format!("{stem}.repair.jsonl")), &emr.repair_log.to_json_lines())?;
        let status = match emr.status {
            EmrStatus::Ok => "ok",
            EmrStatus::Repaired => "repaired",
            EmrStatus::Unparseable => "unparseable",
        };
        let detail = match (&emr.parse_error, emr.stubs.is_empty()) {
            (Some(e), _) => format!("  {e}"),
            (None, true) => String::new(),
            (None, false) => format!("  stubs: {}", emr.stubs.join(", ")),
        };
        println!("{}  {status}{detail}", emr.mr);
    }
    write(&ctx.out("generate.json"), &json(&out.emrs))?;
    if out.emrs.iter().all(|e| e.status == EmrStatus::Unparseable) {
        eprintln!("error: no MR could be converted into a parseable EMR");
        return Ok(Exit::NothingProduced);
    }
    Ok(Exit::Ok)
}

pub fn derive(ctx: &Context, docs: &[PathBuf], allow_empty: bool) -> Result<Exit, CliError> {
    let mut client = ctx.client()?;
    Ok(derive_stage(ctx, docs, allow_empty, client.as_mut())?.1)
}

pub fn generate(ctx: &Context, mrs: &Path, catalog: Option<&Path>) -> Result<Exit, CliError> {
    let text = std::fs::read_to_string(mrs).map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", mrs.display())))?;
    let list: Vec<MetamorphicRelation> =
        serde_json::from_str(&text).map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", mrs.display())))?;
    if let Some(bad) = list.iter().find(|m| m.text.trim().is_empty()) {
        return Err(CliError::new(Exit::Input, format!("{}: {} has no text", mrs.display(), bad.id)));
    }
    let catalog = ctx.catalog(catalog)?;
    if list.is_empty() {
        println!("no MRs to convert");
        return Ok(Exit::Ok);
    }
    let mut client = ctx.client()?;
    generate_stage(ctx, &list, &catalog, client.as_mut())
}

pub fn pipeline(ctx: &Context, docs: &[PathBuf], catalog: Option<&Path>, allow_empty: bool) -> Result<Exit, CliError> {
    let catalog = ctx.catalog(catalog)?;
    let mut client = ctx.client()?;
    let (mrs, derived) = derive_stage(ctx, docs, allow_empty, client.as_mut())?;
    let generated = generate_stage(ctx, &mrs, &catalog, client.as_mut())?;
    Ok(if derived != Exit::Ok { derived } else { generated })
}

fn smrl_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "smrl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", path.display())))
}

pub fn check(ctx: &Context, paths: &[PathBuf], catalog: Option<&Path>, lines: bool) -> Result<Exit, CliError> {
    let catalog = ctx.catalog(catalog)?;
    let mut exit = Exit::Ok;
    for file in smrl_files(paths)? {
        let source = read(&file)?;
        let ast = match parse_emr(&source) {
            Ok(ast) => ast,
            Err(e) => {
                println!("{}:{e}", file.display());
                exit = Exit::Input;
                continue;
            }
        };
        let diags = validate(&ast, &catalog);
        for d in diags.iter().filter(|d| d.severity != Severity::Stub) {
            println!("{}:{d}", file.display());
        }
        if has_errors(&diags) {
            exit = Exit::Input;
        }
        let statements = statement_lines(&ast);
        let simple = statements.iter().filter(|s| s.class == StatementClass::Simple).count();
        let stubs = emrkit_core::stub_names(&diags);
        println!(
            "{}: {} statements ({} simple, {} complex); stubs: {}",
            file.display(),
            statements.len(),
            simple,
            statements.len() - simple,
            if stubs.is_empty() { "none".to_string() } else { stubs.join(", ") }
        );
        if lines {
            for s in &statements {
                println!("{:>5}  {:<7}  {}", s.line, s.class.to_string(), s.code);
            }
        }
    }
    Ok(exit)
}

pub fn repair(file: &Path, in_place: bool, log: Option<&Path>) -> Result<Exit, CliError> {
    let source = read(file)?;
    let (fixed, entries) = repair_source(&source);
    match log {
        Some(path) => write(path, &entries.to_json_lines())?,
        None => eprint!("{}", entries.to_json_lines()),
    }
    if in_place {
        if fixed != source {
            write(file, &fixed)?;
        }
    } else {
        print!("{fixed}");
    }
    if let Err(e) = parse_emr(&fixed) {
        eprintln!("error: {}:{e}", file.display());
        return Ok(Exit::Input);
    }
    Ok(Exit::Ok)
}

pub struct RunArgs {
    pub emrs: Option<PathBuf>,
    pub inputs: Option<PathBuf>,
    pub sut: Option<PathBuf>,
    pub faults: Vec<Fault>,
    pub stubs: Option<StubSet>,
    pub catalog: Option<PathBuf>,
}

fn load_emrs(dir: &Path, catalog: &ApiCatalog) -> Result<Vec<EmrAst>, CliError> {
    let files = smrl_files(&[dir.to_path_buf()])?;
    if files.is_empty() {
        return Err(CliError::new(Exit::Input, format!("{}: no .smrl files", dir.display())));
    }
    let mut out = Vec::new();
    let mut problems = Vec::new();
    for file in files {
        let mut ast = parse_emr(&read(&file)?)
            .map_err(|e| CliError::new(Exit::Input, format!("{}:{e}", file.display())))?;
        for d in validate(&ast, catalog).iter().filter(|d| d.severity == Severity::Error) {
            problems.push(format!("{}:{d}", file.display()));
        }
        ast.id = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        out.push(ast);
    }
    if !problems.is_empty() {
        return Err(CliError::new(Exit::Input, problems.join("\n")));
    }
    Ok(out)
}

fn load_inputs(dir: &Path) -> Result<Vec<NamedInput>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|f| f.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::new(Exit::Input, format!("{}: no .json input files", dir.display())));
    }
    files
        .iter()
        .map(|f| {
            let seq = load_input(f).map_err(|e| CliError::new(Exit::Input, e.to_string()))?;
            let name = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            Ok(NamedInput::new(name, seq))
        })
        .collect()
}

pub fn run(ctx: &Context, args: RunArgs) -> Result<Exit, CliError> {
    let catalog = ctx.catalog(args.catalog.as_deref())?;
    let dir = args.emrs.unwrap_or_else(|| ctx.out("emrs"));
    let emrs = load_emrs(&dir, &catalog)?;
    let stub_set = args.stubs.unwrap_or(ctx.config.stubs);
    let inputs = match (&args.inputs, stub_set) {
        (Some(d), _) => load_inputs(d)?,
        (None, StubSet::Shop) => builtin_inputs(),
        (None, StubSet::None) => {
            return Err(CliError::new(Exit::Input, "--inputs is required without the shop stubs"));
        }
    };
    let mut sut: SutConfig = match &args.sut {
        Some(path) => {
            let text = read(path)?;
            toml::from_str(&text).map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", path.display())))?
        }
        None => ctx.config.sut.clone(),
    };
    if !args.faults.is_empty() {
        sut.faults = args.faults;
    }
    let factory = build_factory(&sut).map_err(|e| match e {
        emrkit_sut::SutError::Config(_) | emrkit_sut::SutError::Io { .. } => CliError::new(Exit::Input, e.to_string()),
        other => CliError::from(other),
    })?;
    let stubs = match stub_set {
        StubSet::Shop => shop_stubs(),
        StubSet::None => StubBindings::new(),
    };
    ctx.note(format!("running {} EMR(s) on {} input(s) against {}", emrs.len(), inputs.len(), factory.describe()));
    let report = run_suite(&emrs, &inputs, factory.as_ref(), &stubs);
    write(&ctx.out("report.json"), &(report.to_json() + "\n"))?;
    let text = report.to_text();
    write(&ctx.out("report.txt"), &text)?;
    print!("{text}");
    let evaluation_errors = report
        .pairs
        .iter()
        .filter(|p| p.error.as_ref().is_some_and(|e| !e.adapter))
        .count();
    Ok(if report.adapter_failures() > 0 {
        Exit::Adapter
    } else if evaluation_errors > 0 {
        Exit::Input
    } else if report.total(VerdictValue::NotExecutable) > 0 {
        Exit::NotExecutable
    } else if report.total(VerdictValue::Fail) > 0 {
        Exit::TestFailure
    } else {
        Exit::Ok
    })
}

#[derive(Serialize)]
struct GradeReport {
    size: Option<emrkit_grader::SizeStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<emrkit_grader::DistributionReport>,
}

pub fn grade(ctx: &Context, emrs: &Path, annotations: Option<&Path>) -> Result<Exit, CliError> {
    let suite = load_emr_dir(emrs)?;
    let asts: Vec<EmrAst> = suite.values().cloned().collect();
    let size = emr_size_stats(&asts);
    match &size {
        Some(s) => println!(
            "{} EMRs, {} statements (min {}, mean {:.1}, max {})",
            s.emrs, s.total, s.min, s.mean, s.max
        ),
        None => println!("no EMRs"),
    }
    let distribution = match annotations {
        Some(path) => {
            let a = load_annotations(path, &suite)?;
            let report = summarize_annotations(&a, size.as_ref().map_or(0, |s| s.total));
            println!();
            print!("{}", report.to_text());
            Some(report)
        }
        None => None,
    };
    write(&ctx.out("grade.json"), &json(&GradeReport { size, distribution }))?;
    Ok(Exit::Ok)
}

pub fn survey(ctx: &Context, file: &Path) -> Result<Exit, CliError> {
    let report = summarize_survey(&load_survey(file)?);
    if report.rows.is_empty() {
        println!("no responses");
    } else {
        print!("{}", report.to_text());
    }
    write(&ctx.out("survey.json"), &report.to_json())?;
    Ok(Exit::Ok)
}
