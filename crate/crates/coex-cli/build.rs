use std::process::Command;

/// Embeds the output of `git describe` so report tables can state exactly
/// which source built them. Falls back to "unknown" outside a git checkout.
fn main() {
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|out| out.status.success())
        .and_then(|out| String::from_utf8(out.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string());
    println!("cargo:rustc-env=GIT_DESCRIBE={describe}");
    // Re-run when the checked-out commit moves so the stamp stays honest.
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
