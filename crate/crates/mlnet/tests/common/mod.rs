#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Two helical chains of `per_chain` residues each, 9 Å apart, written as
/// fixed-column PDB text. Each residue carries N, CA and C atoms; residue 5
/// of chain B has no CA and one CA has an alternate location.
pub fn fixture_pdb(per_chain: usize) -> String {
    let mut s = String::from("HEADER    SYNTHETIC                               01-JAN-00   FIXT              \n");
    let mut serial = 1;
    for (c, chain) in ['A', 'B'].into_iter().enumerate() {
        for i in 0..per_chain {
            let t = (100.0f64 * i as f64).to_radians();
            let ca = [2.3 * t.cos() + 9.0 * c as f64, 2.3 * t.sin(), 1.5 * i as f64];
            let seq = i as i32 + 1;
            let atoms: &[(&str, [f64; 3])] = &[
                ("N", [ca[0] - 0.9, ca[1] + 0.8, ca[2] - 0.5]),
                ("CA", ca),
                ("C", [ca[0] + 0.9, ca[1] - 0.6, ca[2] + 0.4]),
            ];
            for &(name, xyz) in atoms {
                if chain == 'B' && seq == 5 && name == "CA" {
                    continue;
                }
                let alt = if chain == 'A' && seq == 3 && name == "CA" { 'A' } else { ' ' };
                writeln!(
                    s,
                    "ATOM  {serial:>5} {name:<4}{alt}ALA {chain}{seq:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00           C",
                    xyz[0], xyz[1], xyz[2]
                )
                .unwrap();
                serial += 1;
                if alt == 'A' {
                    writeln!(
                        s,
                        "ATOM  {serial:>5} {name:<4}BALA {chain}{seq:>4}    {:>8.3}{:>8.3}{:>8.3}  0.50  0.00           C",
                        xyz[0] + 40.0, xyz[1], xyz[2]
                    )
                    .unwrap();
                    serial += 1;
                }
            }
        }
        writeln!(s, "TER").unwrap();
    }
    writeln!(s, "HETATM{serial:>5}  O   HOH A 900       0.000   0.000   1.000  1.00  0.00           O").unwrap();
    s.push_str("END\n");
    s
}

pub fn write_fixture(dir: &Path, per_chain: usize) -> PathBuf {
    let path = dir.join("fixture.pdb");
    std::fs::write(&path, fixture_pdb(per_chain)).unwrap();
    path
}

pub fn protein_experiment(dir: &Path, name: &str, structure: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let body = format!(
        r#"{{
  "version": 1,
  "kind": "protein",
  "name": "{name}",
  "structure": "{structure}",
  "partition": "by_chain",
  "mode": "joint",
  "thresholds": [6, 8, 10],
  "k_orders": [1, 2],
  "analysis": {{"alpha_grid": {{"start": 0, "stop": 8, "step": 0.5}}}}
}}
"#
    );
    std::fs::write(&path, body).unwrap();
    path
}

pub fn ensemble_experiment(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let body = format!(
        r#"{{
  "version": 1,
  "kind": "ensemble",
  "name": "{name}",
  "seed": 5,
  "network": {{"case": "a", "layers": [30, 40], "intra_p": [0.2, 0.3]}},
  "realizations": 6,
  "k_orders": [2, 3],
  "analysis": {{"alpha_grid": {{"start": 0, "stop": 8, "step": 0.5}}}}
}}
"#
    );
    std::fs::write(&path, body).unwrap();
    path
}

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}
