//! Reader for the line-oriented `.rpd` diagram format.
//!
//! ```text
//! X a b c d      crossing, legs counterclockwise, a = incoming under-strand
//! W a w          arc weight in {0,1} (default 0)
//! L w=<0|1>      free loop
//! O a <+|->      arc orientation relative to its stored direction
//! M a | M L<k>   marked point
//! ```
//! `#` starts a comment.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{ArcId, Crossing, Diagram, Direction, FreeLoop, Mark};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: arc {arc} declared more than once")]
    DuplicateArc { line: usize, arc: ArcId },
    #[error("arc {arc} appears {count} times in crossings (expected 2)")]
    ArcOccurrences { arc: ArcId, count: usize },
    #[error("line {line}: marked point {mark} is not on the diagram")]
    UndeclaredMark { line: usize, mark: String },
    #[error("line {line}: orientation given for undeclared arc {arc}")]
    UndeclaredArc { line: usize, arc: ArcId },
    #[error("line {line}: more than one marked point")]
    DuplicateMark { line: usize },
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &body[s..i],
                    column: body[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &body[s..],
            column: body[..s].chars().count() + 1,
        });
    }
    out
}

pub fn parse_rpd(text: &str) -> Result<Diagram, ParseError> {
    let mut crossings = Vec::new();
    let mut weights: BTreeMap<ArcId, (u8, usize)> = BTreeMap::new();
    let mut loops = Vec::new();
    let mut orientation: Vec<(ArcId, Direction, usize)> = Vec::new();
    let mut marked: Option<(Mark, usize)> = None;

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let toks = tokens(line);
        let Some(head) = toks.first() else { continue };
        let syntax = |column: usize, message: String| ParseError::Syntax {
            line: line_no,
            column,
            message,
        };
        let end_column = line
            .split('#')
            .next()
            .unwrap_or("")
            .trim_end()
            .chars()
            .count()
            + 1;
        let arity = |n: usize| -> Result<(), ParseError> {
            if toks.len() == n + 1 {
                Ok(())
            } else if toks.len() > n + 1 {
                Err(syntax(
                    toks[n + 1].column,
                    format!("unexpected token `{}`", toks[n + 1].text),
                ))
            } else {
                Err(syntax(
                    end_column,
                    format!("`{}` takes {n} argument(s)", head.text),
                ))
            }
        };
        let arc = |t: &Token| -> Result<ArcId, ParseError> {
            match t.text.parse::<ArcId>() {
                Ok(a) if a > 0 => Ok(a),
                _ => Err(syntax(
                    t.column,
                    format!("expected a positive arc id, found `{}`", t.text),
                )),
            }
        };
        let bit = |t: &Token, s: &str| -> Result<u8, ParseError> {
            match s {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(syntax(
                    t.column,
                    format!("expected weight 0 or 1, found `{}`", t.text),
                )),
            }
        };
        match head.text {
            "X" => {
                arity(4)?;
                let legs = [
                    arc(&toks[1])?,
                    arc(&toks[2])?,
                    arc(&toks[3])?,
                    arc(&toks[4])?,
                ];
                crossings.push(Crossing { legs });
            }
            "W" => {
                arity(2)?;
                let a = arc(&toks[1])?;
                let w = bit(&toks[2], toks[2].text)?;
                if weights.insert(a, (w, line_no)).is_some() {
                    return Err(ParseError::DuplicateArc {
                        line: line_no,
                        arc: a,
                    });
                }
            }
            "L" => {
                arity(1)?;
                let t = &toks[1];
                let Some(w) = t.text.strip_prefix("w=") else {
                    return Err(syntax(
                        t.column,
                        format!("expected `w=0` or `w=1`, found `{}`", t.text),
                    ));
                };
                loops.push(FreeLoop { weight: bit(t, w)? });
            }
            "O" => {
                arity(2)?;
                let a = arc(&toks[1])?;
                let dir = match toks[2].text {
                    "+" => Direction::Forward,
                    "-" => Direction::Backward,
                    other => {
                        return Err(syntax(
                            toks[2].column,
                            format!("expected `+` or `-`, found `{other}`"),
                        ))
                    }
                };
                orientation.push((a, dir, line_no));
            }
            "M" => {
                arity(1)?;
                if marked.is_some() {
                    return Err(ParseError::DuplicateMark { line: line_no });
                }
                let t = &toks[1];
                let mark = if let Some(k) = t.text.strip_prefix('L') {
                    match k.parse::<usize>() {
                        Ok(k) => Mark::Loop(k),
                        Err(_) => {
                            return Err(syntax(t.column, format!("bad loop index `{}`", t.text)))
                        }
                    }
                } else {
                    Mark::Arc(arc(t)?)
                };
                marked = Some((mark, line_no));
            }
            other => {
                return Err(syntax(
                    head.column,
                    format!("unknown declaration `{other}`"),
                ));
            }
        }
    }

    let mut counts: BTreeMap<ArcId, usize> = BTreeMap::new();
    for x in &crossings {
        for &a in &x.legs {
            *counts.entry(a).or_default() += 1;
        }
    }
    for &a in weights.keys() {
        counts.entry(a).or_default();
    }
    if let Some((&arc, &count)) = counts.iter().find(|(_, &c)| c != 2) {
        return Err(ParseError::ArcOccurrences { arc, count });
    }

    let arcs: BTreeMap<ArcId, u8> = counts
        .keys()
        .map(|&a| (a, weights.get(&a).map_or(0, |&(w, _)| w)))
        .collect();
    let mut orient = BTreeMap::new();
    for (a, dir, line) in orientation {
        if !arcs.contains_key(&a) {
            return Err(ParseError::UndeclaredArc { line, arc: a });
        }
        orient.insert(a, dir);
    }
    if let Some((mark, line)) = marked {
        let ok = match mark {
            Mark::Arc(a) => arcs.contains_key(&a),
            Mark::Loop(k) => k < loops.len(),
        };
        if !ok {
            return Err(ParseError::UndeclaredMark {
                line,
                mark: mark.to_string(),
            });
        }
    }

    Ok(Diagram {
        crossings,
        arcs,
        loops,
        orientation: orient,
        marked: marked.map(|(m, _)| m),
    })
}
