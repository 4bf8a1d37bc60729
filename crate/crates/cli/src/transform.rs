use std::path::Path;

use anyhow::{bail, Result};

use cfspanner::transforms::{functionalize, project, to_cnf, union};
use cfspanner::{serialize_grammar, Variable};

use crate::input::load_grammar;
use crate::TransformArgs;

pub fn run(args: &TransformArgs) -> Result<()> {
    let g = load_grammar(&args.grammar)?;
    let out = match args.target.split_once(':') {
        None if args.target == "cnf" => to_cnf(&g),
        None if args.target == "functional" => functionalize(&to_cnf(&g))?.into_grammar(),
        Some(("project", list)) => {
            let keep = list
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(Variable::new)
                .collect::<Result<Vec<_>, _>>()?;
            project(&g, &keep)?
        }
        Some(("union", path)) => union(&g, &load_grammar(Path::new(path))?)?,
        _ => bail!(
            "unknown transform target {:?}; expected cnf, functional, project:<vars> or union:<path>",
            args.target
        ),
    };
    print!("{}", serialize_grammar(&out));
    Ok(())
}
