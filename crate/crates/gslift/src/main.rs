use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use gslift::cameras::{load_cameras, load_prompts};
use gslift::formats::{read_assignment, read_matrix, write_assignment, write_matrix, write_render_grids};
use gslift::masks::render_preview;
use gslift::ply::{export_ply, load_scene_ply};
use gslift::synth::{generate, Preset, SynthConfig};
use gslift::{pipeline, server, Error};
use gslift_core::raster::render_view;
use gslift_core::{
    backproject_prompt, extract_subset, project_prompts_to_views, AssignmentMode, Channel, PromptTarget, RenderConfig,
};

#[derive(Parser)]
#[command(name = "gslift", version, about = "Lift 2D label masks onto a 3D Gaussian splatting scene")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accumulate the contribution matrix A from masked views.
    #[command(args_override_self = true)]
    Accumulate {
        scene: PathBuf,
        cameras: PathBuf,
        /// Directory of {view_id}.png masks; defaults to each camera's mask_path.
        #[arg(long)]
        masks: Option<PathBuf>,
        /// Object count E, background included.
        #[arg(long)]
        num_objects: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the assignment from A.
    #[command(args_override_self = true)]
    Assign {
        matrix: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value = "scene")]
        mode: AssignmentMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render 16-bit label masks for some or all views.
    #[command(args_override_self = true)]
    RenderMask {
        scene: PathBuf,
        assignment: PathBuf,
        cameras: PathBuf,
        #[arg(long, value_delimiter = ',')]
        views: Vec<u32>,
        #[arg(long, default_value_t = gslift_core::DEFAULT_TAU)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render accumulated alpha and depth grids plus a color preview.
    #[command(args_override_self = true)]
    Render {
        scene: PathBuf,
        cameras: PathBuf,
        #[arg(long, value_delimiter = ',')]
        views: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Delete the members of the given objects and export the rest.
    #[command(args_override_self = true)]
    Remove {
        scene: PathBuf,
        assignment: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        objects: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export only the members of the given objects.
    #[command(args_override_self = true)]
    Extract {
        scene: PathBuf,
        assignment: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        objects: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted masks against ground truth.
    #[command(args_override_self = true)]
    Eval { pred: PathBuf, gt: PathBuf },
    /// Write a synthetic scene, cameras and masks.
    #[command(args_override_self = true)]
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        gaussians: usize,
        #[arg(long, default_value_t = 12)]
        views: u32,
        #[arg(long, default_value = "two-cluster")]
        preset: Preset,
        /// Image width and height.
        #[arg(long, default_value_t = 128)]
        size: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resolve pixel prompts to Gaussians and project them into every view.
    #[command(args_override_self = true)]
    Propagate {
        scene: PathBuf,
        cameras: PathBuf,
        prompts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the scene and A over HTTP.
    #[command(args_override_self = true)]
    Serve {
        scene: PathBuf,
        cameras: PathBuf,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Directory for scenes exported by /remove.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn write_json(path: &std::path::Path, value: &serde_json::Value) -> gslift::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json");
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn run(cmd: Command) -> gslift::Result<()> {
    match cmd {
        Command::Accumulate { scene, cameras, masks, num_objects, out } => {
            let scene = load_scene_ply(&scene)?;
            let cameras = load_cameras(&cameras)?;
            let a = pipeline::accumulate(&scene, &cameras, masks.as_deref(), num_objects)?;
            write_matrix(&out, &a)?;
            let observed = (0..a.num_gaussians).filter(|&i| a.observed(i)).count();
            println!("A: {} objects x {} Gaussians, {observed} observed", a.num_objects, a.num_gaussians);
        }
        Command::Assign { matrix, gamma, mode, out } => {
            let a = read_matrix(&matrix)?;
            let assignment = pipeline::assign(&a, gamma, mode)?;
            write_assignment(&out, &assignment)?;
            for (object, count) in assignment.member_counts().iter().enumerate() {
                println!("object {object}: {count}");
            }
        }
        Command::RenderMask { scene, assignment, cameras, views, tau, out } => {
            let scene = load_scene_ply(&scene)?;
            let assignment = read_assignment(&assignment)?;
            let cameras = load_cameras(&cameras)?;
            let selected = pipeline::select_views(&cameras, &views)?;
            for (id, labeled) in pipeline::render_masks(&scene, &assignment, &selected, tau, &out)? {
                println!("view {id}: {labeled} labeled pixels");
            }
        }
        Command::Render { scene, cameras, views, out } => {
            let scene = load_scene_ply(&scene)?;
            let cameras = load_cameras(&cameras)?;
            for view in pipeline::select_views(&cameras, &views)? {
                let r = render_view(&scene, view, Channel::None, RenderConfig::default())?;
                write_render_grids(&out, &view.view_id.to_string(), &r)?;
                let png = render_preview(&scene, view)?;
                let path = out.join(format!("{}_preview.png", view.view_id));
                std::fs::write(&path, png).map_err(|e| Error::Io { path, source: e })?;
            }
        }
        Command::Remove { scene, assignment, objects, out } => {
            let scene = load_scene_ply(&scene)?;
            let assignment = read_assignment(&assignment)?;
            let edited = pipeline::remove(&scene, &assignment, &objects)?;
            export_ply(&edited, &out)?;
            println!("kept {} of {} Gaussians", edited.len(), scene.len());
        }
        Command::Extract { scene, assignment, objects, out } => {
            let scene = load_scene_ply(&scene)?;
            let assignment = read_assignment(&assignment)?;
            let (subset, _) = extract_subset(&scene, &assignment, &objects)?;
            export_ply(&subset, &out)?;
            println!("kept {} of {} Gaussians", subset.len(), scene.len());
        }
        Command::Eval { pred, gt } => {
            print!("{}", pipeline::evaluate(&pred, &gt)?.table());
        }
        Command::Synth { seed, gaussians, views, preset, size, out } => {
            let s = generate(&SynthConfig { seed, gaussians, views, preset, size })?;
            s.write(&out)?;
            println!("{} Gaussians, {} views, {} objects", s.scene.len(), s.views.len(), s.num_objects);
        }
        Command::Propagate { scene, cameras, prompts, out } => {
            let scene = load_scene_ply(&scene)?;
            let cameras = load_cameras(&cameras)?;
            let mut results = Vec::new();
            for p in load_prompts(&prompts)? {
                let view = cameras
                    .view(p.view_id)
                    .ok_or_else(|| gslift_core::Error::Lookup(format!("no view with id {}", p.view_id)))?;
                let index = backproject_prompt(&scene, view, [p.x, p.y])?;
                let targets: Vec<serde_json::Value> = project_prompts_to_views(&scene, index, &cameras.views)?
                    .into_iter()
                    .map(|(view_id, t)| match t {
                        PromptTarget::Visible([x, y]) => serde_json::json!({"view_id": view_id, "status": "visible", "x": x, "y": y}),
                        PromptTarget::OutOfFrame([x, y]) => serde_json::json!({"view_id": view_id, "status": "out_of_frame", "x": x, "y": y}),
                        PromptTarget::BehindCamera => serde_json::json!({"view_id": view_id, "status": "behind_camera"}),
                    })
                    .collect();
                results.push(serde_json::json!({
                    "view_id": p.view_id, "x": p.x, "y": p.y, "gaussian_index": index, "targets": targets,
                }));
            }
            write_json(&out, &serde_json::Value::Array(results))?;
        }
        Command::Serve { scene, cameras, matrix, bind, out } => {
            let scene = load_scene_ply(&scene)?;
            let cameras = load_cameras(&cameras)?;
            let matrix = matrix.map(|m| read_matrix(&m)).transpose()?;
            if let Some(a) = &matrix {
                if a.num_gaussians != scene.len() {
                    return Err(gslift_core::Error::Input(format!(
                        "matrix covers {} Gaussians, scene has {}",
                        a.num_gaussians,
                        scene.len()
                    ))
                    .into());
                }
            }
            let state = Arc::new(server::AppState::new(scene, cameras.views, matrix, out));
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Io { path: "tokio runtime".into(), source: e })?;
            rt.block_on(server::serve(state, bind))
                .map_err(|e| Error::Io { path: bind.to_string().into(), source: e })?;
        }
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let args = match gslift::config::expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
