//! Pattern expressions such as `pq,(qp,none)^3,(both)*`.
//!
//! Items are separated by commas. An item is a graph name (`pq`, `qp`,
//! `both`/`pqp`, `none`), a raw row-major bit string, or a parenthesized list
//! followed by `^N` (repeat N times) or `*` (repeat until the horizon; must be
//! the last item).

use anyhow::{bail, Context, Result};
use stabsim::graphs::{lift_two_process, CommGraph, LinkGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    Graph(CommGraph),
    Repeat(Vec<Item>, u64),
    Forever(Vec<Item>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn list(&mut self) -> Result<Vec<Item>> {
        let mut items = vec![self.item()?];
        while self.eat(',') {
            items.push(self.item()?);
        }
        Ok(items)
    }

    fn item(&mut self) -> Result<Item> {
        self.skip_ws();
        if self.eat('(') {
            let inner = self.list()?;
            if !self.eat(')') {
                bail!("expected ')' at offset {}", self.pos);
            }
            if self.eat('*') {
                return Ok(Item::Forever(inner));
            }
            if self.eat('^') {
                self.skip_ws();
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let count = self.src[start..self.pos]
                    .parse()
                    .with_context(|| format!("expected a repeat count at offset {start}"))?;
                return Ok(Item::Repeat(inner, count));
            }
            return Ok(Item::Repeat(inner, 1));
        }
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        let word = &self.src[start..self.pos];
        if word.is_empty() {
            bail!("expected a graph at offset {start}");
        }
        Ok(Item::Graph(self.graph(word)?))
    }

    fn graph(&self, word: &str) -> Result<CommGraph> {
        if let Ok(link) = word.parse::<LinkGraph>() {
            return Ok(if self.n == 2 {
                link.graph()
            } else {
                lift_two_process(&link.graph(), self.n)?
            });
        }
        if word.chars().all(|c| c == '0' || c == '1') {
            let g: CommGraph = word.parse()?;
            if g.n() != self.n {
                bail!("graph {word} has {} processes, expected {}", g.n(), self.n);
            }
            return Ok(g);
        }
        bail!("unknown graph {word:?}")
    }
}

fn expand(items: &[Item], horizon: Option<u64>, out: &mut Vec<CommGraph>) -> Result<()> {
    for (i, item) in items.iter().enumerate() {
        match item {
            Item::Graph(g) => out.push(g.clone()),
            Item::Repeat(inner, count) => {
                for _ in 0..*count {
                    expand(inner, None, out)?;
                }
            }
            Item::Forever(inner) => {
                if i + 1 != items.len() {
                    bail!("a `*` group must be the last item");
                }
                let Some(horizon) = horizon else {
                    bail!("a `*` group needs a horizon and cannot be nested");
                };
                let mut cycle = Vec::new();
                expand(inner, None, &mut cycle)?;
                if cycle.is_empty() {
                    bail!("empty `*` group");
                }
                let mut j = 0;
                while (out.len() as u64) < horizon {
                    out.push(cycle[j % cycle.len()].clone());
                    j += 1;
                }
            }
        }
    }
    Ok(())
}

/// Expands a pattern expression over `n` processes. With a horizon the
/// result has exactly `horizon` rounds.
pub fn parse_pattern(src: &str, n: usize, horizon: Option<u64>) -> Result<Vec<CommGraph>> {
    let mut p = Parser { src, pos: 0, n };
    let items = p.list()?;
    p.skip_ws();
    if p.pos != src.len() {
        bail!("unexpected input at offset {} in pattern {src:?}", p.pos);
    }
    let mut out = Vec::new();
    expand(&items, horizon, &mut out)?;
    if let Some(h) = horizon {
        if out.len() as u64 != h {
            bail!("pattern has {} rounds but the horizon is {h}", out.len());
        }
    }
    Ok(out)
}
