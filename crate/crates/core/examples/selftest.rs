//! The built-in battery, as the binary's `selftest` prints it, plus a check
//! of the shipped scripts with a tighter budget read from a workspace.

use dialectica::cli::selftest::SCRIPTS;
use dialectica::cli::{check, selftest, Options, Workspace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = selftest(&Options::default())?;
    print!("{}", report.to_text());

    let workspace = Workspace::from_toml("[budget]\nnat_max = 4\nseed = 9\n")?;
    let opts = Options { workspace, ..Options::default() };
    for (name, src, _) in SCRIPTS {
        let r = check(src, &opts)?;
        println!("{name} with nat_max 4: exit {}", r.exit_code);
    }
    Ok(())
}
