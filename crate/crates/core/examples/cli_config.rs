//! Driving the command-line front end in-process with a flat configuration.
fn main() {
    let dir = std::env::temp_dir().join("hquasi_cli_config");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let cfg = dir.join("envelope.cfg");
    let text = "\
domain_lo = -2, -2, -3
domain_hi = 2, 2, 3
dims = 17, 17, 25
K = 8
generator = abs_one_minus_z2
method = direct
n_theta = 8
slices = z:0.5
";
    std::fs::write(&cfg, text).expect("config");
    let out = dir.join("out");
    let code = hquasi::cli::run(["hquasi", "envelope", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    println!("exit code {code}, outputs in {}", out.display());
}
