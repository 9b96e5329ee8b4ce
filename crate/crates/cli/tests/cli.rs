use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

const BIN: &str = env!("CARGO_BIN_EXE_noma-crs");

const SCENARIO: &str = r#"
[power]
rho_t_db = 20.0
alpha = 0.2
beta = 0.5

[channel.sr]
m = 1.0
omega = 2.0
[channel.sd]
m = 1.0
omega = 1.0
[channel.rd]
m = 1.0
omega = 2.0

[comparison]
alpha = 0.1
beta = 0.5
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

struct Fixture {
    _dir: tempfile::TempDir,
    config: PathBuf,
    models: PathBuf,
    root: PathBuf,
}

/// A scenario file plus a small trained model set, shared by the tests.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let config = root.join("scenario.toml");
        std::fs::write(&config, SCENARIO).unwrap();
        let data = root.join("data.csv");
        let o = run(&[
            "dataset", "--out", data.to_str().unwrap(), "--rho-db", "10:10:20", "--m-values", "1:1:2",
            "--omega-values", "1:3:10", "--grid", "20",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let models = root.join("models");
        let o = run(&["train", "--data", data.to_str().unwrap(), "--out", models.to_str().unwrap(), "--max-epochs", "30"]);
        let table = stdout(&o);
        assert!(table.starts_with(
            "model_file,mode,rho_t_db,train_records,test_records,train_mse,test_mse,regression_r,epochs,stop_reason"
        ));
        assert_eq!(table.lines().count(), 3);
        Fixture { _dir: dir, config, models, root }
    })
}

fn cfg() -> &'static str {
    fixture().config.to_str().unwrap()
}

fn models() -> &'static str {
    fixture().models.to_str().unwrap()
}

#[test]
fn analyze_header_and_monotone_abep() {
    let o = run(&["analyze", "--config", cfg(), "--rho-db", "0:5:40"]);
    let text = stdout(&o);
    assert!(text.starts_with("rho_db,p_x2,p_x1_sr,p_x1_rd,p_x1,abep\n"));
    let abep = column(&text, "abep");
    assert_eq!(abep.len(), 9);
    assert!(abep.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn analyze_at_very_low_snr_is_a_coin_flip() {
    let text = stdout(&run(&["analyze", "--config", cfg(), "--rho-db", "-40"]));
    let abep = column(&text, "abep");
    assert!((abep[0] - 0.5).abs() < 1e-2, "{abep:?}");
}

#[test]
fn empty_sweep_writes_header_only() {
    let o = run(&["analyze", "--config", cfg(), "--rho-db", "10:5:0"]);
    assert_eq!(stdout(&o), "rho_db,p_x2,p_x1_sr,p_x1_rd,p_x1,abep\n");
}

#[test]
fn simulate_is_seeded() {
    let args = ["simulate", "--config", cfg(), "--rho-db", "10", "--trials", "20000", "--seed", "3"];
    let a = stdout(&run(&args));
    assert_eq!(a, stdout(&run(&args)));
    assert!(a.starts_with("rho_db,ber_mc,ci95,ber_x1,ber_x2,ber_x1_relay,trials,seed,abep\n"));
}

#[test]
fn optimize_header_and_surface_file() {
    let surface = fixture().root.join("surface.csv");
    let o = run(&["optimize", "--config", cfg(), "--grid", "15", "--surface", surface.to_str().unwrap()]);
    assert_eq!(header(&o), "rho_db,alpha_star,beta_star,ber_star,evaluations,warning");
    let s = std::fs::read_to_string(&surface).unwrap();
    assert!(s.starts_with("alpha,beta,ber\n"));
    assert_eq!(s.lines().count(), 1 + 15 * 15);
}

#[test]
fn optimize_mc_engine_runs() {
    let o = run(&["optimize", "--config", cfg(), "--grid", "3", "--engine", "mc", "--trials", "2000"]);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn predict_reports_op_count() {
    let text = stdout(&run(&["predict", "--config", cfg(), "--model", models(), "--rho-db", "10:10:20"]));
    assert!(text.starts_with("rho_db,alpha_hat,beta_hat,model_rho_db,weight_mults,bias_adds,activations,total_ops\n"));
    assert_eq!(column(&text, "total_ops"), vec![104.0, 104.0]);
    assert_eq!(column(&text, "model_rho_db"), vec![10.0, 20.0]);
    for a in column(&text, "alpha_hat") {
        assert!(a > 0.0 && a < 0.5);
    }
}

#[test]
fn sweep_headers() {
    let cases: [(&[&str], &str); 5] = [
        (&["fig1a", "--rho-db", "10", "--grid", "10"], "profile,rho_db,split,alpha,beta,abep,ber_mc,ci95"),
        (
            &["fig1c", "--rho-db", "10", "--grid", "10", "--model", models()],
            "rho_db,ber_fixed,ber_full_search,ber_surrogate,alpha_star,beta_star,alpha_hat,beta_hat",
        ),
        (
            &["fig2", "--rho-db", "10", "--grid", "10", "--model", models()],
            "rho_db,m_sr,m_sd,m_rd,omega_sr,omega_rd,alpha_star,beta_star,alpha_hat,beta_hat",
        ),
        (
            &["fig3a", "--rho-db", "10", "--grid", "10", "--config", cfg()],
            "rho_db,split,alpha_proposed,beta_proposed,ber_proposed,alpha_comparison,beta_comparison,ber_comparison",
        ),
        (&["fig3b", "--grid", "5"], "alpha,beta,ber"),
    ];
    for (args, want) in cases {
        let mut full = vec!["sweep"];
        full.extend_from_slice(args);
        assert_eq!(header(&run(&full)), want, "{args:?}");
    }
}

#[test]
fn fig4_header() {
    let o = run(&["sweep", "fig4", "--rho-db", "10", "--grid", "3", "--trials", "2000", "--model", models()]);
    let text = stdout(&o);
    assert!(text.starts_with(
        "rho_db,ber_fixed,ber_full_search,ber_surrogate,ci95_fixed,ci95_full_search,ci95_surrogate,alpha_star,beta_star,alpha_hat,beta_hat,warning\n"
    ));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn fig1a_simulation_column_tracks_closed_form() {
    let text = stdout(&run(&["sweep", "fig1a", "--rho-db", "10", "--grid", "10", "--trials", "200000"]));
    let (abep, mc, ci) = (column(&text, "abep"), column(&text, "ber_mc"), column(&text, "ci95"));
    for i in 0..abep.len() {
        assert!((abep[i] - mc[i]).abs() <= 4.0 * ci[i], "row {i}: {} vs {}", abep[i], mc[i]);
    }
}

#[test]
fn fig2_labels_follow_relay_position() {
    let text = stdout(&run(&["sweep", "fig2", "--rho-db", "20", "--model", models()]));
    let (a, b) = (column(&text, "alpha_star"), column(&text, "beta_star"));
    assert_eq!(a.len(), 14);
    for chunk in 0..2 {
        let r = chunk * 7..chunk * 7 + 7;
        assert!(a[r.clone()].windows(2).all(|w| w[1] <= w[0]), "{a:?}");
        assert!(b[r].windows(2).all(|w| w[1] <= w[0]), "{b:?}");
    }
}

#[test]
fn missing_model_is_named() {
    let missing = Path::new("/nonexistent/models-dir");
    let o = run(&["sweep", "fig1c", "--rho-db", "10", "--model", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/models-dir"));

    let o = run(&["sweep", "fig1c", "--rho-db", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--model"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--config", "/nonexistent.toml"]).status.code(), Some(5));

    let bad = fixture().root.join("bad.toml");
    std::fs::write(&bad, SCENARIO.replace("alpha = 0.2", "alpha = 0.7")).unwrap();
    let o = run(&["analyze", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));

    let qpsk = fixture().root.join("qpsk.toml");
    std::fs::write(&qpsk, format!("modulation = \"qpsk\"\n{SCENARIO}")).unwrap();
    assert_eq!(run(&["analyze", "--config", qpsk.to_str().unwrap()]).status.code(), Some(3));

    let no_cmp = fixture().root.join("nocmp.toml");
    std::fs::write(&no_cmp, SCENARIO.split("[comparison]").next().unwrap()).unwrap();
    assert_eq!(run(&["sweep", "fig3a", "--config", no_cmp.to_str().unwrap()]).status.code(), Some(3));

    assert_eq!(run(&["analyze", "--config", cfg(), "--rho-db", "0:0:10"]).status.code(), Some(2));
}

#[test]
fn dataset_is_byte_identical_across_runs() {
    let root = &fixture().root;
    let paths = [root.join("d1.csv"), root.join("d2.csv")];
    for p in &paths {
        let o = run(&[
            "dataset", "--out", p.to_str().unwrap(), "--rho-db", "10", "--m-values", "1:1:2", "--omega-values", "1:4:9",
            "--records", "20", "--seed", "5", "--grid", "10",
        ]);
        assert!(o.status.success());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("m_sr,m_sd,m_rd,omega_sr,omega_sd,omega_rd,rho_t_db,alpha_star,beta_star\n"));
    assert_eq!(text.lines().count(), 21);
}
