//! Persists a run, stops it after one band, resumes it, checks that it
//! regenerates byte for byte and writes the audit reports.

use std::path::Path;

use symsat::archive::{AuditKind, AuditOptions, RunArchive, RunManifest};

fn main() -> symsat::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/bernoulli");
    let mut manifest = RunManifest::load(&data.join("manifest.json"))?;
    manifest.bands = 2;
    manifest.horizon = 300_000;
    let dir = std::env::temp_dir().join(format!("symsat-example-{}", std::process::id()));

    let archive = RunArchive::create(&dir, &manifest, &data)?;
    let st = archive.run(Some(1))?;
    println!("stopped: {} of {} bands, {} symbols", st.bands_done, st.bands, st.length);
    let st = RunArchive::open(&dir)?.run(None)?;
    println!("resumed: {} symbols, complete {}", st.length, st.complete);
    println!("regenerates identically: {}", archive.reproduces()?);

    for kind in AuditKind::ALL {
        if kind == AuditKind::Birkhoff {
            continue;
        }
        let out = archive.audit(kind, &AuditOptions::default())?;
        println!("{}: {} ({})", kind.name(), if out.pass { "pass" } else { "FAIL" }, out.summary);
    }
    println!("archive in {}", dir.display());
    Ok(())
}
