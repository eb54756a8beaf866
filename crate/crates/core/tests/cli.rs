use std::path::Path;
use std::process::{Command, Output};

use s4gauss::immersion::{write_grid_file, GridData, ImmersionSpec, SurfaceKind};

fn s4gauss(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_s4gauss"))
        .args(args)
        .current_dir(cwd)
        .env("S4GAUSS_THREADS", "2")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn clifford_lattice(dir: &Path, n: usize, corrupt: Option<usize>) {
    let spec = ImmersionSpec::analytic(SurfaceKind::CliffordTorus).unwrap();
    let grid = spec.grid(n).unwrap();
    let mut samples: Vec<_> = (0..grid.len())
        .map(|k| {
            let (x, y) = grid.point(k);
            spec.kind.value(x, y).unwrap()
        })
        .collect();
    if let Some(k) = corrupt {
        samples[k] *= 1.1;
    }
    let data = GridData::from_samples("lattice.s4grid", &grid, samples).unwrap();
    write_grid_file(&dir.join("lattice.s4grid"), &data).unwrap();
    std::fs::write(
        dir.join("grid.cfg"),
        "[immersion]\nkind = grid_file\npath = lattice.s4grid\n",
    )
    .unwrap();
}

#[test]
fn verify_clifford_passes_and_writes_the_reference_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.cfg"),
        "[immersion] kind=clifford_torus [grid] nx=64 ny=64",
    )
    .unwrap();
    let o = s4gauss(&["verify", "--config", "c.cfg", "--out", "out"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let verify = std::fs::read_to_string(dir.path().join("out/verify.csv")).unwrap();
    assert!(verify.starts_with("check,max,rms,threshold,pass\n"));
    assert!(verify.lines().skip(1).all(|l| l.ends_with(",1")));

    let fields = std::fs::read_to_string(dir.path().join("out/fields.csv")).unwrap();
    let mut lines = fields.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,y,u,h1,h2,re_xi1,im_xi1,re_xi2,im_xi2,re_sigma,im_sigma,K,Kperp,res_G,res_C1,res_C2,res_R,density"
    );
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    let expected = [
        0.0,
        0.0,
        -std::f64::consts::LN_2,
        0.0,
        0.0,
        -0.25,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ];
    for (c, e) in expected.iter().enumerate() {
        assert!((row[c] - e).abs() <= 1e-15, "column {c}: {}", row[c]);
    }
    assert!(row[13..17].iter().all(|r| r.abs() < 1e-12));
    assert!((row[17] - 2.0).abs() <= 1e-15);
}

#[test]
fn corrupted_grid_file_fails_verify_with_on_sphere_listed() {
    let dir = tempfile::tempdir().unwrap();
    clifford_lattice(dir.path(), 24, Some(37));
    let o = s4gauss(&["verify", "--config", "grid.cfg", "--out", "out"], dir.path());
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let verify = std::fs::read_to_string(dir.path().join("out/verify.csv")).unwrap();
    let row = verify
        .lines()
        .find(|l| l.starts_with("on_sphere,"))
        .expect("on_sphere row");
    assert!(row.ends_with(",0"), "{row}");
    let max: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((max - 0.1).abs() < 1e-9, "{row}");
}

#[test]
fn grid_file_round_trips_through_the_mesh_export() {
    let dir = tempfile::tempdir().unwrap();
    clifford_lattice(dir.path(), 24, None);
    let o = s4gauss(&["analyze", "--config", "grid.cfg", "--out", "out"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lattice = std::fs::read_to_string(dir.path().join("lattice.s4grid")).unwrap();
    let mesh = std::fs::read_to_string(dir.path().join("out/mesh.s4mesh")).unwrap();
    assert!(mesh.starts_with("S4MESH 24 24\n"));
    let f_cols: Vec<String> = mesh
        .lines()
        .skip(1)
        .map(|l| l.splitn(3, ' ').nth(2).unwrap().to_string())
        .collect();
    let samples: Vec<&str> = lattice.lines().skip(1).collect();
    assert_eq!(f_cols, samples);
}

#[test]
fn sphere_mesh_stays_in_the_s2_slice() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.cfg"),
        "[immersion] kind=equatorial_sphere radius=0.5 [output] obj=false",
    )
    .unwrap();
    let o = s4gauss(
        &["analyze", "--config", "s.cfg", "--out", "out", "--n", "17"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let mesh = std::fs::read_to_string(dir.path().join("out/mesh.s4mesh")).unwrap();
    for line in mesh.lines().skip(1) {
        let cols: Vec<&str> = line.split(' ').collect();
        assert_eq!(&cols[5..], ["0", "0"], "{line}");
    }
    assert!(!dir.path().join("out/mesh.obj").exists());
}

#[test]
fn tension_verdict_is_data_not_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("m.cfg"),
        "[immersion]\nkind = moebius\ncenter = 0.3, 0, 0, 0, 0\n",
    )
    .unwrap();
    let o = s4gauss(
        &["tension", "--config", "m.cfg", "--out", "out", "--n", "32"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict = NOT HARMONIC"));
    let csv = std::fs::read_to_string(dir.path().join("out/tension.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 32 * 32);
}

#[test]
fn energy_and_family_commands() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.cfg"),
        "[immersion] kind=pmc_torus [grid] nx=24 ny=24",
    )
    .unwrap();
    let o = s4gauss(&["energy", "--config", "p.cfg", "--out", "out"], dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("out/energy.txt")).unwrap();
    let e: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("E = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((e - 8.0 * 3f64.sqrt() / 3.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
    assert!(text.contains("genus = 1\n"));

    let o = s4gauss(
        &[
            "family",
            "--config",
            "p.cfg",
            "--out",
            "fam",
            "--lambda",
            "1,i,theta=0.5",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fam/family.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for k in 0..3 {
        assert!(dir.path().join(format!("fam/family_{k:03}.s4mesh")).exists());
        assert!(dir.path().join(format!("fam/family_{k:03}.obj")).exists());
    }
}

#[test]
fn exit_codes_for_configuration_problems() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.cfg"),
        "[immersion]\nkind = pmc_torus\na = 0.9\nb = 0.5\n",
    )
    .unwrap();
    let o = s4gauss(&["verify", "--config", "bad.cfg"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(code(&s4gauss(&["verify", "--config", "missing.cfg"], dir.path())), 2);
    assert_eq!(code(&s4gauss(&["verify"], dir.path())), 2);
    assert_eq!(code(&s4gauss(&["explode", "--config", "bad.cfg"], dir.path())), 2);
    std::fs::write(dir.path().join("c.cfg"), "[immersion] kind=clifford_torus").unwrap();
    assert_eq!(
        code(&s4gauss(
            &["family", "--config", "c.cfg", "--lambda", "0.5"],
            dir.path()
        )),
        2
    );
    let o = Command::new(env!("CARGO_BIN_EXE_s4gauss"))
        .args(["catalog"])
        .env("S4GAUSS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn catalog_needs_no_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = s4gauss(&["catalog"], dir.path());
    assert_eq!(code(&o), 0);
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(
        s.contains("clifford_torus") && s.contains("E = 39.47841760435743"),
        "{s}"
    );
}
