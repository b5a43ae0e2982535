//! End-to-end tests of the `cns` binary.

use cns_core::colorname::ColorPrototypes;
use cns_core::synthetic;
use std::path::Path;
use std::process::{Command, Output};

fn cns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cns"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to spawn cns")
}

fn save_rgb(img: &cns_core::Rgb8Image, path: &Path) {
    let mut buf = image::RgbImage::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            buf.put_pixel(x, y, image::Rgb(img.get(x, y)));
        }
    }
    buf.save(path).unwrap();
}

fn save_mask(mask: &cns_core::BoolMap, path: &Path) {
    let mut buf = image::GrayImage::new(mask.width(), mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            buf.put_pixel(x, y, image::Luma([if mask.get(x, y) { 255 } else { 0 }]));
        }
    }
    buf.save(path).unwrap();
}

// Small scene so CLI-driven detects stay fast: 120x90 object on background.
fn small_scene(obj: usize, bg: usize, half: u32) -> (cns_core::Rgb8Image, cns_core::BoolMap) {
    let protos = ColorPrototypes::default();
    let (w, h) = (120u32, 90u32);
    let (cx, cy) = (w / 2, h / 2);
    let inside = move |x: u32, y: u32| x.abs_diff(cx) <= half && y.abs_diff(cy) <= half;
    let img = cns_core::Rgb8Image::from_fn(w, h, |x, y| {
        if inside(x, y) {
            protos.rgb_u8(obj)
        } else {
            protos.rgb_u8(bg)
        }
    });
    (img, cns_core::BoolMap::from_fn(w, h, inside))
}

#[test]
fn detect_writes_map_and_prints_params() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let output = dir.path().join("out.png");
    let scene = synthetic::convex_object_scene(1);
    save_rgb(&scene.image, &input);

    let out = run(cns().arg("detect").arg(&input).arg(&output).args([
        "--preset",
        "imgsal",
        "--threads",
        "2",
    ]));
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("delta=32 omega_c=18 omega_r=9 theta_r=0.003 theta_g=2"));
    // fallback-table warning lands on stderr, not stdout
    assert!(String::from_utf8_lossy(&out.stderr).contains("fallback"));

    let png = std::fs::read(&output).unwrap();
    let decoded = image::load_from_memory(&png).unwrap();
    assert_eq!(
        (decoded.width(), decoded.height()),
        (scene.image.width(), scene.image.height())
    );
}

#[test]
fn detect_explicit_flags_match_preset() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let (img, _) = small_scene(8, 9, 30);
    save_rgb(&img, &input);

    let by_preset = dir.path().join("preset.png");
    let by_flags = dir.path().join("flags.png");
    assert!(run(cns()
        .arg("detect")
        .arg(&input)
        .arg(&by_preset)
        .args(["--preset", "imgsal"]))
    .status
    .success());
    assert!(run(cns().arg("detect").arg(&input).arg(&by_flags).args([
        "--delta",
        "32",
        "--omega-c",
        "18",
        "--omega-r",
        "9",
        "--theta-r",
        "0.003",
        "--theta-g",
        "2",
    ]))
    .status
    .success());
    assert_eq!(
        std::fs::read(&by_preset).unwrap(),
        std::fs::read(&by_flags).unwrap()
    );
}

#[test]
fn detect_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let (img, _) = small_scene(4, 0, 25);
    save_rgb(&img, &input);

    let mut outputs = Vec::new();
    for (name, threads) in [("a.png", "1"), ("b.png", "2"), ("c.png", "2")] {
        let path = dir.path().join(name);
        assert!(run(cns()
            .arg("detect")
            .arg(&input)
            .arg(&path)
            .args(["--threads", threads]))
        .status
        .success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn usage_errors_exit_one_help_exits_zero() {
    assert_eq!(run(cns().arg("--help")).status.code(), Some(0));
    assert_eq!(run(cns().arg("detect")).status.code(), Some(1));
    assert_eq!(run(cns().arg("no-such-command")).status.code(), Some(1));
}

#[test]
fn detect_missing_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(cns()
        .arg("detect")
        .arg(dir.path().join("nope.png"))
        .arg(dir.path().join("out.png")));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn detect_bad_table_warns_and_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let (img, _) = small_scene(1, 9, 20);
    save_rgb(&img, &input);
    let out = run(cns()
        .arg("detect")
        .arg(&input)
        .arg(dir.path().join("out.png"))
        .args(["--table", "/nonexistent/table.txt"]));
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning") && stderr.contains("fallback"));
}

#[test]
fn table_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let (img, _) = small_scene(8, 9, 20);
    save_rgb(&img, &input);

    // minimal valid table: every bin votes black with certainty
    let table = dir.path().join("table.txt");
    std::fs::write(&table, "1 0 0 0 0 0 0 0 0 0 0\n".repeat(32768)).unwrap();

    let out = run(cns()
        .env("CNS_TABLE", &table)
        .arg("detect")
        .arg(&input)
        .arg(dir.path().join("out.png"))
        .args(["--preset", "imgsal"]));
    assert!(out.status.success(), "{out:?}");
    // a real table loaded: no fallback warning
    assert!(!String::from_utf8_lossy(&out.stderr).contains("fallback"));

    // an all-black color name image has zero contrast weights -> empty map
    let png = std::fs::read(dir.path().join("out.png")).unwrap();
    let map = image::load_from_memory(&png).unwrap().to_luma8();
    assert!(map.pixels().all(|p| p.0[0] == 0));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let (img, _) = small_scene(2, 10, 22);
    save_rgb(&img, &input);
    let config = dir.path().join("cns.conf");
    std::fs::write(&config, "preset = imgsal\ntheta_g = 2.5\n").unwrap();

    let out = run(cns()
        .arg("detect")
        .arg(&input)
        .arg(dir.path().join("out.png"))
        .arg("--config")
        .arg(&config)
        .args(["--theta-g", "1.5"]));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("delta=32"), "{stdout}");
    assert!(stdout.contains("theta_g=1.5"), "{stdout}");
}

#[test]
fn batch_processes_directory_and_tolerates_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    let maps = dir.path().join("maps");
    std::fs::create_dir(&images).unwrap();
    // one fixture per supported input format
    for (i, (obj, bg, ext)) in [(8usize, 9usize, "png"), (1, 10, "jpg"), (4, 0, "bmp")]
        .iter()
        .enumerate()
    {
        let (img, _) = small_scene(*obj, *bg, 20 + i as u32);
        save_rgb(&img, &images.join(format!("img{i}.{ext}")));
    }
    std::fs::write(images.join("broken.png"), b"not a png").unwrap();

    let out = run(cns().arg("batch").arg(&images).arg(&maps).args([
        "--preset",
        "imgsal",
        "--threads",
        "2",
    ]));
    assert!(out.status.success(), "batch must keep going: {out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("processed 3 image(s), 1 failed"),
        "{stdout}"
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.png"));
    for i in 0..3 {
        assert!(maps.join(format!("img{i}.png")).exists());
    }
}

#[test]
fn batch_empty_dir_reports_zero() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("empty");
    std::fs::create_dir(&images).unwrap();
    let out = run(cns().arg("batch").arg(&images).arg(dir.path().join("maps")));
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("processed 0 image(s)"));
}

#[test]
fn batch_unreadable_dir_exits_one() {
    let out = run(cns()
        .arg("batch")
        .arg("/nonexistent-dir")
        .arg("/tmp/whatever-out"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_perfect_maps_score_one() {
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");
    let gts = dir.path().join("gt");
    std::fs::create_dir_all(&maps).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    for seed in 0..3u64 {
        let scene = synthetic::convex_object_scene(seed);
        save_mask(&scene.mask, &maps.join(format!("s{seed}.png")));
        save_mask(&scene.mask, &gts.join(format!("s{seed}.png")));
    }
    let curves = dir.path().join("curves.csv");
    let summary = dir.path().join("summary.txt");
    let out = run(cns()
        .arg("eval")
        .arg(&maps)
        .arg(&gts)
        .arg("--curves")
        .arg(&curves)
        .arg("--summary")
        .arg(&summary));
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("AdaptF = 1.0000"), "{stdout}");
    assert!(stdout.contains("MaxF = 1.0000"), "{stdout}");

    let csv = std::fs::read_to_string(&curves).unwrap();
    assert_eq!(csv.lines().count(), 257);
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.contains("AvgF = 0.99"), "{text}");
}

#[test]
fn eval_all_black_maps_score_zero() {
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");
    let gts = dir.path().join("gt");
    std::fs::create_dir_all(&maps).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    let scene = synthetic::convex_object_scene(0);
    let black = cns_core::BoolMap::new(scene.mask.width(), scene.mask.height());
    save_mask(&black, &maps.join("a.png"));
    save_mask(&scene.mask, &gts.join("a.png"));
    let out = run(cns()
        .arg("eval")
        .arg(&maps)
        .arg(&gts)
        .arg("--curves")
        .arg(dir.path().join("c.csv"))
        .arg("--summary")
        .arg(dir.path().join("s.txt")));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("AvgF = 0.0000"), "{stdout}");
    assert!(stdout.contains("AdaptF = 0.0000"), "{stdout}");
}

#[test]
fn eval_mismatched_stems_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");
    let gts = dir.path().join("gt");
    std::fs::create_dir_all(&maps).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    let scene = synthetic::convex_object_scene(0);
    save_mask(&scene.mask, &maps.join("only-here.png"));
    save_mask(&scene.mask, &gts.join("only-there.png"));
    let out = run(cns().arg("eval").arg(&maps).arg(&gts));
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("only-here") && stderr.contains("only-there"),
        "{stderr}"
    );
}

#[test]
fn sweep_singleton_grid_emits_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    let gts = dir.path().join("gt");
    std::fs::create_dir_all(&images).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    let (img, mask) = small_scene(8, 9, 28);
    save_rgb(&img, &images.join("a.png"));
    save_mask(&mask, &gts.join("a.png"));

    let csv_path = dir.path().join("sweep.csv");
    let out = run(cns()
        .arg("sweep")
        .arg(&images)
        .arg(&gts)
        .args([
            "--grid",
            "omega_r=9",
            "--preset",
            "imgsal",
            "--threads",
            "2",
        ])
        .arg("--output")
        .arg(&csv_path));
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert_eq!(lines[0], "parameter,value,max_f");
    assert!(lines[1].starts_with("omega_r,9,"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("best:"));
}

#[test]
fn sweep_large_omega_r_erases_small_object() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    let gts = dir.path().join("gt");
    std::fs::create_dir_all(&images).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    // object half-size 12 at working width 400 (120 input upscales x3.33):
    // radius ~40 after resize, erased once the disk outgrows it
    let (img, mask) = small_scene(8, 9, 12);
    save_rgb(&img, &images.join("a.png"));
    save_mask(&mask, &gts.join("a.png"));

    let csv_path = dir.path().join("sweep.csv");
    let out = run(cns()
        .arg("sweep")
        .arg(&images)
        .arg(&gts)
        .args([
            "--grid",
            "omega_r=14:28:70",
            "--preset",
            "imgsal",
            "--delta",
            "64",
            "--threads",
            "2",
        ])
        .arg("--output")
        .arg(&csv_path));
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 3, "{csv}");
    assert!(
        rows[0] > 0.9 && rows[2] < 0.1,
        "expected declining MaxF tail, got {rows:?}"
    );
}

#[test]
fn sweep_bad_grid_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    let gts = dir.path().join("gt");
    std::fs::create_dir_all(&images).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    let (img, mask) = small_scene(8, 9, 20);
    save_rgb(&img, &images.join("a.png"));
    save_mask(&mask, &gts.join("a.png"));
    let out = run(cns()
        .arg("sweep")
        .arg(&images)
        .arg(&gts)
        .args(["--grid", "bogus=1:1:5"]));
    assert_eq!(out.status.code(), Some(1));
}
