use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use simsim_cli::args::{Cli, Command};
use simsim_cli::{
    cmd_charpoly, cmd_construct, cmd_decide, cmd_diag, cmd_gen, cmd_verify, CmdOutput, Exit,
};

fn read_input(path: Option<&Path>) -> io::Result<String> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn emit(out: &CmdOutput, output: Option<&PathBuf>) -> io::Result<()> {
    match output {
        Some(p) => fs::write(p, &out.stdout)?,
        None => io::stdout().write_all(out.stdout.as_bytes())?,
    }
    io::stderr().write_all(out.stderr.as_bytes())
}

fn run(cli: Cli) -> io::Result<Exit> {
    let (out, output) = match &cli.command {
        Command::Decide(a) => (
            cmd_decide(&read_input(a.input.as_deref())?, &a.options()),
            &a.output,
        ),
        Command::Diag(a) => (
            cmd_diag(&read_input(a.input.as_deref())?, &a.options()),
            &a.output,
        ),
        Command::Charpoly(a) => (
            cmd_charpoly(&read_input(a.input.as_deref())?, &a.options()),
            &a.output,
        ),
        Command::Construct(c) => {
            let a = &c.instance;
            (
                cmd_construct(&read_input(a.input.as_deref())?, &a.options(), c.seed),
                &a.output,
            )
        }
        Command::Verify(v) => {
            let a = &v.instance;
            let cert = fs::read_to_string(&v.cert)?;
            (
                cmd_verify(&read_input(a.input.as_deref())?, &cert, &a.options()),
                &a.output,
            )
        }
        Command::Gen(g) => {
            let (spec, kind) = g.spec();
            (cmd_gen(&spec, kind), &g.output)
        }
    };
    emit(&out, output.as_ref())?;
    Ok(out.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(exit) => ExitCode::from(exit.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::InputError.code() as u8)
        }
    }
}
