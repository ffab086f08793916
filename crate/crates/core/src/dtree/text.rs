//! Textual tree format: `f[child,child,...]` for internal nodes, bare label
//! names for leaves and `N` for holes. Whitespace between tokens is ignored.

use std::fmt;

use thiserror::Error;

use super::{DecisionTree, Node, TreeSpace, HOLE_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownSymbol(String),
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    /// A label or hole followed by a child list.
    ChildrenOnTerminal(String),
    Unbalanced,
    Unexpected(char),
    UnexpectedEnd,
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownSymbol(s) => write!(f, "unknown symbol `{s}`"),
            ParseErrorKind::Arity {
                name,
                expected,
                found,
            } => write!(f, "`{name}` takes {expected} children, found {found}"),
            ParseErrorKind::ChildrenOnTerminal(s) => write!(f, "`{s}` cannot have children"),
            ParseErrorKind::Unbalanced => write!(f, "unbalanced brackets"),
            ParseErrorKind::Unexpected(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::TrailingInput => write!(f, "trailing input after tree"),
        }
    }
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{kind} at offset {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

struct Parser<'a> {
    space: &'a TreeSpace,
    text: &'a str,
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(match rest.chars().next() {
                None => self.err(start, ParseErrorKind::UnexpectedEnd),
                Some(']') => self.err(start, ParseErrorKind::Unbalanced),
                Some(c) => self.err(start, ParseErrorKind::Unexpected(c)),
            });
        }
        self.pos += len;
        Ok((start, &rest[..len]))
    }

    fn node(&mut self) -> Result<Node, ParseError> {
        let (start, name) = self.ident()?;
        let has_children = self.peek() == Some('[');
        if name == HOLE_TOKEN || self.space.label_index(name).is_some() {
            if has_children {
                return Err(self.err(start, ParseErrorKind::ChildrenOnTerminal(name.into())));
            }
            return Ok(match self.space.label_index(name) {
                Some(l) => Node::Leaf(l),
                None => Node::Hole,
            });
        }
        let func = self
            .space
            .function_index(name)
            .ok_or_else(|| self.err(start, ParseErrorKind::UnknownSymbol(name.into())))?;
        let expected = self.space.functions()[func].branch_count;
        if !has_children {
            return Err(self.err(
                self.pos,
                ParseErrorKind::Arity {
                    name: name.into(),
                    expected,
                    found: 0,
                },
            ));
        }
        self.pos += 1;
        self.depth += 1;
        let mut children = Vec::with_capacity(expected);
        loop {
            children.push(self.node()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => return Err(self.err(self.pos, ParseErrorKind::Unexpected(c))),
                None => return Err(self.err(self.pos, ParseErrorKind::Unbalanced)),
            }
        }
        self.depth -= 1;
        if children.len() != expected {
            return Err(self.err(
                start,
                ParseErrorKind::Arity {
                    name: name.into(),
                    expected,
                    found: children.len(),
                },
            ));
        }
        Ok(Node::Internal { func, children })
    }
}

pub(super) fn parse(space: &TreeSpace, text: &str) -> Result<DecisionTree, ParseError> {
    let mut parser = Parser {
        space,
        text,
        pos: 0,
        depth: 0,
    };
    let root = parser.node()?;
    debug_assert_eq!(parser.depth, 0);
    match parser.peek() {
        None => Ok(DecisionTree::from_root(root)),
        Some(']') => Err(parser.err(parser.pos, ParseErrorKind::Unbalanced)),
        Some(_) => Err(parser.err(parser.pos, ParseErrorKind::TrailingInput)),
    }
}

pub(super) fn render(space: &TreeSpace, tree: &DecisionTree) -> String {
    fn walk(space: &TreeSpace, node: &Node, out: &mut String) {
        match node {
            Node::Hole => out.push_str(HOLE_TOKEN),
            Node::Leaf(l) => out.push_str(&space.labels()[*l]),
            Node::Internal { func, children } => {
                out.push_str(&space.functions()[*func].name);
                out.push('[');
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    walk(space, c, out);
                }
                out.push(']');
            }
        }
    }
    let mut out = String::new();
    walk(space, tree.root(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::FunctionSpec;

    fn space() -> TreeSpace {
        TreeSpace::new(
            vec![
                FunctionSpec::new("f1", 2, 1, 0),
                FunctionSpec::new("f2", 3, 2, 1),
            ],
            vec!["l1".into(), "l2".into()],
            3,
        )
        .unwrap()
    }

    #[test]
    fn parses_grammar_strings() {
        let s = space();
        let t = s.parse("f1[l1,l2]").unwrap();
        assert_eq!(
            t.root(),
            &Node::Internal {
                func: 0,
                children: vec![Node::Leaf(0), Node::Leaf(1)]
            }
        );
        assert_eq!(s.parse("l1").unwrap(), DecisionTree::leaf(0));
        assert_eq!(s.parse("N").unwrap(), DecisionTree::hole());
        let spaced = s.parse(" f2 [ l1 , f1[N, l2] ,l2 ] ").unwrap();
        assert_eq!(s.render(&spaced), "f2[l1,f1[N,l2],l2]");
    }

    #[test]
    fn arity_mismatch() {
        let err = space().parse("f1[l1]").unwrap_err();
        assert_eq!(err.position, 0);
        assert_eq!(
            err.kind,
            ParseErrorKind::Arity {
                name: "f1".into(),
                expected: 2,
                found: 1
            }
        );
        let err = space().parse("f1").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { found: 0, .. }));
    }

    #[test]
    fn unknown_symbol_position() {
        let err = space().parse("f1[l1,zz]").unwrap_err();
        assert_eq!(err.position, 6);
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol("zz".into()));
    }

    #[test]
    fn unbalanced_brackets() {
        let err = space().parse("f1[l1,l2").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unbalanced);
        assert_eq!(err.position, 8);
        let err = space().parse("f1[l1,l2]]").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unbalanced);
        assert_eq!(err.position, 9);
        let err = space().parse("f1[l1,]").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unbalanced);
    }

    #[test]
    fn misc_errors() {
        let s = space();
        assert_eq!(s.parse("").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(
            s.parse("l1[l1,l2]").unwrap_err().kind,
            ParseErrorKind::ChildrenOnTerminal("l1".into())
        );
        assert_eq!(s.parse("l1 l2").unwrap_err().kind, ParseErrorKind::TrailingInput);
        assert_eq!(
            s.parse("f1[l1;l2]").unwrap_err().kind,
            ParseErrorKind::Unexpected(';')
        );
    }
}
