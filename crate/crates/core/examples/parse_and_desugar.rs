//! Parse a guest function, desugar it to the core language and print both
//! forms, then show how unsupported features are reported.

use accel::ast::{check_core, pretty};
use accel::desugar::desugar;
use accel::parse::parse;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = accel::bench::by_name("authorize").expect("benchmark").source;
    let surface = parse(&src)?;
    println!("surface program:\n{}", pretty(&surface));

    let core = desugar(&surface);
    check_core(&core)?;
    println!("core program:\n{}", pretty(&core));
    println!("AST as JSON:\n{}", serde_json::to_string_pretty(&core)?);

    for bad in ["let x = eval('1');", "let y = a == b;", "for (let k in o) {}", "let = 3;"] {
        match parse(bad) {
            Ok(_) => println!("{bad:24} parsed"),
            Err(e) if e.is_unsupported() => println!("{bad:24} unsupported: {e}"),
            Err(e) => println!("{bad:24} rejected: {e}"),
        }
    }
    Ok(())
}
