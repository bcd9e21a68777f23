//! Canonical concrete syntax. Printing is deterministic and `parse` inverts it
//! on every term the parser can produce.

use std::fmt::{self, Display, Formatter, Write};

use crate::log::ActionKind;
use crate::syntax::{AtomicExpr, ChoiceBranch, OngoingExpr, Polarity, Process};

fn action_sigil(k: ActionKind) -> char {
    match k {
        ActionKind::Read => '?',
        ActionKind::Write => '!',
    }
}

impl Display for AtomicExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            AtomicExpr::End => f.write_str("end"),
            AtomicExpr::Retry => f.write_str("retry"),
            AtomicExpr::Prefix { action, rest } => {
                write!(f, "{}{}.", action.channel, action_sigil(action.kind))?;
                if matches!(**rest, AtomicExpr::OrElse { .. }) {
                    write!(f, "({rest})")
                } else {
                    write!(f, "{rest}")
                }
            }
            AtomicExpr::OrElse { left, right } => {
                if matches!(**left, AtomicExpr::OrElse { .. }) {
                    write!(f, "({left}) orElse {right}")
                } else {
                    write!(f, "{left} orElse {right}")
                }
            }
        }
    }
}

impl fmt::Debug for AtomicExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

impl Display for OngoingExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            OngoingExpr::Running { expr, init, log } => write!(f, "[{expr}]_({init};{log})"),
            OngoingExpr::OrElse { left, right } => write!(f, "({left} orElse {right})"),
        }
    }
}

impl fmt::Debug for OngoingExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Par,
    Sum,
    Prefix,
    Atom,
}

fn level(p: &Process) -> Level {
    match p {
        Process::Par { parts } if parts.len() >= 2 => Level::Par,
        // degenerate n-ary forms still print with the operator, so bracket them
        Process::Par { .. } => Level::Par,
        Process::Choice { branches } if branches.len() >= 2 => Level::Sum,
        Process::Choice { .. } | Process::Input { .. } | Process::Repl { .. } => Level::Prefix,
        _ => Level::Atom,
    }
}

fn write_at(f: &mut Formatter<'_>, p: &Process, min: Level) -> fmt::Result {
    if level(p) < min {
        write!(f, "({p})")
    } else {
        write!(f, "{p}")
    }
}

fn write_branch(f: &mut Formatter<'_>, b: &ChoiceBranch) -> fmt::Result {
    let sigil = match b.polarity {
        Polarity::In => '?',
        Polarity::Out => '!',
    };
    write!(f, "{}{}.", b.channel, sigil)?;
    write_at(f, &b.body, Level::Prefix)
}

impl Display for Process {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Process::Nil => f.write_str("0"),
            Process::Output { channel } => write!(f, "{channel}!"),
            Process::Input { channel, body } => {
                write!(f, "{channel}?.")?;
                write_at(f, body, Level::Prefix)
            }
            Process::Repl { channel, body, fired } => {
                if *fired > 0 {
                    write!(f, "*{{{fired}}}{channel}?.")?;
                } else {
                    write!(f, "*{channel}?.")?;
                }
                write_at(f, body, Level::Prefix)
            }
            Process::Par { parts } => {
                if parts.is_empty() {
                    return f.write_str("(0 | 0)");
                }
                if parts.len() == 1 {
                    return write!(f, "(0 | {})", parts[0]);
                }
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write_at(f, p, Level::Sum)?;
                }
                Ok(())
            }
            Process::Hide { body, name, pending } => {
                write_at(f, body, Level::Atom)?;
                write!(f, " \\ {name}:{pending}")
            }
            Process::Atomic { expr } => write!(f, "atomic({expr})"),
            Process::Ongoing { body, original } => write!(f, "atomic<{body}>({original})"),
            Process::Choice { branches } => {
                if branches.len() == 1 {
                    f.write_char('+')?;
                    return write_branch(f, &branches[0]);
                }
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write_branch(f, b)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}
