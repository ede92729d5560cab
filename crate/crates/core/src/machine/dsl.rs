use std::fmt;

use thiserror::Error;

use super::{Action, Command, Condition, Configuration, Effect, GlassTest, Guard, MachineError, MinskyMachine};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: MachineError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'#' {
            break;
        }
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if matches!(b, b':' | b',' | b'=' | b'>') {
            out.push(Token { text: &line[i..i + 1], column: i + 1 });
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len()
            && !bytes[i].is_ascii_whitespace()
            && !matches!(bytes[i], b':' | b',' | b'=' | b'>' | b'#')
        {
            i += 1;
        }
        out.push(Token { text: &line[start..i], column: start + 1 });
    }
    out
}

struct LineParser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    line: usize,
    width: usize,
}

impl<'a> LineParser<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        let column = self.tokens.get(self.pos).map_or(self.width + 1, |t| t.column);
        ParseError::Syntax { line: self.line, column, message: message.into() }
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.text)
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{want}`, found `{t}`"))),
            None => Err(self.err(format!("expected `{want}`, found end of line"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.peek() {
            Some(t) => match t.parse::<u64>() {
                Ok(n) => {
                    self.pos += 1;
                    Ok(n)
                }
                Err(_) => Err(self.err(format!("expected {what}, found `{t}`"))),
            },
            None => Err(self.err(format!("expected {what}, found end of line"))),
        }
    }

    fn glass(&mut self, glasses: usize) -> Result<usize, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self.err("expected glass `g<k>`, found end of line"));
        };
        let k = t
            .strip_prefix('g')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| self.err(format!("expected glass `g<k>`, found `{t}`")))?;
        if k == 0 || k > glasses {
            return Err(self.err(format!("glass g{k} out of range (machine has {glasses} glasses)")));
        }
        self.pos += 1;
        Ok(k)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }
}

/// Parses the machine DSL: a `machine <name> glasses=<K>` header followed by one
/// command per line.
pub fn parse_machine(text: &str) -> Result<MinskyMachine, ParseError> {
    let mut header: Option<(String, usize, usize)> = None;
    let mut commands = Vec::new();
    let mut command_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let mut p = LineParser { tokens, pos: 0, line: line_no, width: raw.len() };
        match &header {
            None => {
                p.expect("machine")?;
                let name = p.next().ok_or_else(|| p.err("expected machine name"))?.to_string();
                p.expect("glasses")?;
                p.expect("=")?;
                let k = p.number("glass count")? as usize;
                if !p.at_end() {
                    return Err(p.err("unexpected token after header"));
                }
                if k < 2 {
                    return Err(ParseError::Invalid { line: line_no, source: MachineError::TooFewGlasses(k) });
                }
                header = Some((name, k, line_no));
            }
            Some((_, k, _)) => {
                commands.push(parse_command(&mut p, *k)?);
                command_lines.push(line_no);
            }
        }
    }

    let (name, glasses, header_line) =
        header.ok_or(ParseError::Syntax { line: 1, column: 1, message: "missing `machine` header".into() })?;
    MinskyMachine::new(name, glasses, commands.clone()).map_err(|source| {
        let line = match &source {
            MachineError::DanglingNext { label, next } => commands
                .iter()
                .position(|c| c.label == *label && c.next == *next)
                .map(|i| command_lines[i]),
            MachineError::UnguardedDec { label, .. } | MachineError::GlassOutOfRange { label, .. } => {
                commands.iter().position(|c| c.label == *label).map(|i| command_lines[i])
            }
            _ => None,
        }
        .unwrap_or(header_line);
        ParseError::Invalid { line, source }
    })
}

fn parse_command(p: &mut LineParser<'_>, glasses: usize) -> Result<Command, ParseError> {
    let label = p.number("command label")?;
    if label == 0 {
        p.pos -= 1;
        return Err(p.err("label 0 is the stop command and has no instruction"));
    }
    p.expect(":")?;

    let mut tests = Vec::new();
    if p.peek() == Some("if") {
        p.next();
        loop {
            let glass = p.glass(glasses)?;
            let condition = match p.next() {
                Some("=") => Condition::Zero,
                Some(">") => Condition::Positive,
                _ => {
                    p.pos -= 1;
                    return Err(p.err("expected `=0` or `>0`"));
                }
            };
            let zero_col = p.pos;
            if p.number("0")? != 0 {
                p.pos = zero_col;
                return Err(p.err("glass tests compare against 0"));
            }
            if tests.iter().any(|t: &GlassTest| t.glass == glass) {
                return Err(p.err(format!("glass g{glass} tested twice")));
            }
            tests.push(GlassTest { glass, condition });
            let continues = p.peek() == Some(",")
                && p.tokens.get(p.pos + 1).is_some_and(|t| t.text.starts_with('g'));
            if !continues {
                break;
            }
            p.next();
        }
    }

    let mut actions = Vec::new();
    loop {
        let action = match p.peek() {
            Some("inc") => Action::Inc,
            Some("dec") => Action::Dec,
            _ => break,
        };
        p.next();
        let glass = p.glass(glasses)?;
        if actions.iter().any(|a: &Action| a.glass() == glass) {
            p.pos -= 1;
            return Err(p.err(format!("glass g{glass} touched twice")));
        }
        actions.push(action(glass));
        if p.peek() == Some(",") {
            p.next();
        } else {
            break;
        }
    }

    p.expect("goto")?;
    let next = p.number("target label")?;
    if !p.at_end() {
        return Err(p.err("unexpected token after target label"));
    }
    let guard = Guard::conj(tests).expect("distinct glasses checked above");
    let effect = Effect::new(actions).expect("distinct glasses checked above");
    Ok(Command::new(label as u32, guard, effect, next as u32))
}

/// Parses `1;2,0` (parentheses optional).
pub fn parse_configuration(text: &str) -> Option<Configuration> {
    let t = text.trim().trim_start_matches('(').trim_end_matches(')');
    let (label, rest) = t.split_once(';')?;
    let label = label.trim().parse().ok()?;
    let glasses = rest
        .split(',')
        .map(|g| g.trim().parse::<u64>().ok())
        .collect::<Option<Vec<_>>>()?;
    Some(Configuration::new(label, glasses))
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label)?;
        if !self.guard.tests().is_empty() {
            f.write_str(" if")?;
            for (i, t) in self.guard.tests().iter().enumerate() {
                let op = match t.condition {
                    Condition::Zero => "=0",
                    Condition::Positive => ">0",
                };
                write!(f, "{} g{}{}", if i > 0 { "," } else { "" }, t.glass, op)?;
            }
        }
        for (i, a) in self.effect.actions().iter().enumerate() {
            let (word, g) = match *a {
                Action::Inc(g) => ("inc", g),
                Action::Dec(g) => ("dec", g),
            };
            write!(f, "{} {word} g{g}", if i > 0 { "," } else { "" })?;
        }
        write!(f, " goto {}", self.next)
    }
}

impl fmt::Display for MinskyMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "machine {} glasses={}", self.name, self.glasses)?;
        for c in &self.commands {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{ClassicForm, GuardKind};

    #[test]
    fn zero_jump_line() {
        let m = parse_machine("machine t glasses=2\n1: if g1=0 goto 0\n").unwrap();
        assert_eq!(m.commands()[0].classic_form(), Some(ClassicForm::ZeroJump(1)));
    }

    #[test]
    fn sub_line() {
        let m = parse_machine("machine t glasses=2\n1: if g1>0 dec g1 goto 2\n2: inc g2 goto 0\n").unwrap();
        assert_eq!(m.commands()[0].classic_form(), Some(ClassicForm::Sub(1)));
    }

    #[test]
    fn glass_out_of_range() {
        let err = parse_machine("machine t glasses=2\n1: inc g7 goto 1\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                column: 8,
                message: "glass g7 out of range (machine has 2 glasses)".into()
            }
        );
    }

    #[test]
    fn dangling_and_unguarded() {
        let err = parse_machine("machine t glasses=2\n1: inc g1 goto 5\n").unwrap_err();
        assert!(matches!(err, ParseError::Invalid { line: 2, source: MachineError::DanglingNext { .. } }));
        let err = parse_machine("machine t glasses=2\n# c\n1: dec g1 goto 0\n").unwrap_err();
        assert!(matches!(err, ParseError::Invalid { line: 3, source: MachineError::UnguardedDec { .. } }));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_machine("machine t glasses=2\n1: if g1<0 goto 0\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn multi_forms_round_trip() {
        let src = "machine d glasses=5
1: if g5=0 inc g1, inc g4 goto 1
1: inc g4, inc g5 goto 1
1: if g4=0, g5=0 goto 0
";
        let m = parse_machine(src).unwrap();
        assert_eq!(m.commands()[2].guard.kind(), GuardKind::Conj);
        assert_eq!(m.commands()[1].effect.actions().len(), 2);
        assert_eq!(m.to_string(), src);
    }

    #[test]
    fn reference_machines_round_trip() {
        use crate::machine::reference::{EX_A, EX_C};
        for src in [EX_A, EX_C] {
            assert_eq!(parse_machine(src).unwrap().to_string(), src);
        }
    }

    #[test]
    fn configuration_text() {
        assert_eq!(parse_configuration("1;2,0"), Some(Configuration::new(1, vec![2, 0])));
        assert_eq!(parse_configuration("(0;0,3,1)"), Some(Configuration::new(0, vec![0, 3, 1])));
        assert_eq!(parse_configuration("1,2"), None);
    }
}
