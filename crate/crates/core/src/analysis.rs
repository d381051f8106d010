//! Lexical identifier extraction and shared-identifier links between cells.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexer::{is_keyword, tokenize, Token, TokenKind};

/// Variables and functions a code cell mentions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierSet {
    pub variables: BTreeSet<String>,
    pub functions: BTreeSet<String>,
}

impl IdentifierSet {
    pub fn names(&self) -> BTreeSet<&str> {
        self.variables.iter().chain(&self.functions).map(String::as_str).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty() && self.functions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentifierRole {
    Variable,
    Function,
}

/// One identifier mention, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub name: String,
    pub role: IdentifierRole,
}

/// Identifier mentions in source order. A call `a.b(...)` yields the function
/// `a.b` followed by the variable `a`.
pub fn identifier_occurrences(source: &str) -> Vec<Occurrence> {
    let tokens: Vec<Token> = tokenize(source)
        .into_iter()
        .filter(|t| !matches!(t.kind, TokenKind::Comment { .. }))
        .collect();

    // One entry per open bracket: true if `name=` inside it is a keyword argument.
    let mut kwarg_scopes: Vec<bool> = Vec::new();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        match tok.kind {
            TokenKind::Op if matches!(tok.text.as_str(), "(" | "[" | "{") => {
                let after_callee = i > 0
                    && (tokens[i - 1].kind == TokenKind::Name
                        || tokens[i - 1].is_op(")")
                        || tokens[i - 1].is_op("]"));
                let def_params = i >= 2 && tokens[i - 2].is_name("def");
                kwarg_scopes.push(tok.text == "(" && after_callee && !def_params);
                i += 1;
                continue;
            }
            TokenKind::Op if matches!(tok.text.as_str(), ")" | "]" | "}") => {
                kwarg_scopes.pop();
                i += 1;
                continue;
            }
            TokenKind::Name => {}
            _ => {
                i += 1;
                continue;
            }
        }

        if is_keyword(&tok.text) || (i > 0 && tokens[i - 1].is_op(".")) {
            i += 1;
            continue;
        }

        let mut chain = vec![tok.text.as_str()];
        let mut j = i + 1;
        while j + 1 < tokens.len()
            && tokens[j].is_op(".")
            && tokens[j + 1].kind == TokenKind::Name
            && !is_keyword(&tokens[j + 1].text)
        {
            chain.push(tokens[j + 1].text.as_str());
            j += 2;
        }
        let next = tokens.get(j);

        if next.is_some_and(|t| t.is_op("(")) {
            out.push(Occurrence { name: chain.join("."), role: IdentifierRole::Function });
            if chain.len() > 1 {
                out.push(Occurrence { name: chain[0].to_string(), role: IdentifierRole::Variable });
            }
        } else {
            let keyword_arg = chain.len() == 1
                && next.is_some_and(|t| t.is_op("="))
                && kwarg_scopes.last().copied().unwrap_or(false);
            if !keyword_arg {
                out.push(Occurrence { name: chain[0].to_string(), role: IdentifierRole::Variable });
            }
        }
        i = j;
    }
    out
}

/// Variables and functions used by a code cell.
///
/// A name directly followed by `(` is a function (dotted chains kept whole);
/// the root of a dotted call chain also counts as a variable. Any other
/// non-keyword name is a variable. Names used as both end up as functions only.
pub fn extract_identifiers(source: &str) -> IdentifierSet {
    let mut set = IdentifierSet::default();
    for occ in identifier_occurrences(source) {
        match occ.role {
            IdentifierRole::Function => set.functions.insert(occ.name),
            IdentifierRole::Variable => set.variables.insert(occ.name),
        };
    }
    let functions = &set.functions;
    set.variables.retain(|v| !functions.contains(v));
    set
}

pub fn shared_identifiers(a: &IdentifierSet, b: &IdentifierSet) -> BTreeSet<String> {
    a.names().intersection(&b.names()).map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkQuery {
    pub anchor_index: usize,
    /// Links require strictly more than `n` shared names.
    pub n: usize,
}

/// Cells sharing more than `q.n` identifiers with the anchor, ascending by index.
pub fn overlap_links(q: LinkQuery, cells: &[(usize, &IdentifierSet)]) -> Result<Vec<usize>> {
    let anchor = cells
        .iter()
        .find(|(idx, _)| *idx == q.anchor_index)
        .map(|(_, ids)| *ids)
        .ok_or(Error::AnchorNotFound(q.anchor_index))?;
    let mut linked: Vec<usize> = cells
        .iter()
        .filter(|(idx, _)| *idx != q.anchor_index)
        .filter(|(_, ids)| shared_identifiers(anchor, ids).len() > q.n)
        .map(|(idx, _)| *idx)
        .collect();
    linked.sort_unstable();
    linked.dedup();
    Ok(linked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn ids(vars: &[&str], funcs: &[&str]) -> IdentifierSet {
        IdentifierSet { variables: set(vars), functions: set(funcs) }
    }

    #[test]
    fn single_assignment() {
        assert_eq!(extract_identifiers("x = 1"), ids(&["x"], &[]));
    }

    #[test]
    fn dotted_call() {
        assert_eq!(extract_identifiers("model.fit(X, y)"), ids(&["model", "X", "y"], &["model.fit"]));
    }

    #[test]
    fn for_loop() {
        assert_eq!(
            extract_identifiers("for i in range(10): print(i)"),
            ids(&["i"], &["range", "print"])
        );
    }

    #[test]
    fn strings_comments_keywords_literals_are_excluded() {
        let got = extract_identifiers(
            "# foo(bar)\nif flag is not None and x == True:\n    s = 'baz(qux)' + f\"{w}\"\n    n = 3.5e-2",
        );
        assert_eq!(got, ids(&["flag", "x", "s", "n"], &[]));
    }

    #[test]
    fn keyword_arguments_are_not_variables() {
        let got = extract_identifiers("clf = KNN(n_neighbors=k, weights='distance')");
        assert_eq!(got, ids(&["clf", "k"], &["KNN"]));
        let got = extract_identifiers("def f(a, b=2):\n    return a + b");
        assert_eq!(got, ids(&["a", "b"], &["f"]));
    }

    #[test]
    fn attribute_access_counts_root_only() {
        let got = extract_identifiers("n = df.shape[0]\nplt.show()");
        assert_eq!(got, ids(&["n", "df", "plt"], &["plt.show"]));
    }

    #[test]
    fn roles_are_disjoint() {
        let got = extract_identifiers("f = g\nf()");
        assert_eq!(got, ids(&["g"], &["f"]));
    }

    #[test]
    fn occurrence_order() {
        let names: Vec<String> =
            identifier_occurrences("df = pd.read_csv(f)").into_iter().map(|o| o.name).collect();
        assert_eq!(names, vec!["df", "pd.read_csv", "pd", "f"]);
    }

    #[test]
    fn shared_examples() {
        assert_eq!(
            shared_identifiers(&ids(&["x", "y"], &["f"]), &ids(&["y"], &["f"])),
            set(&["y", "f"])
        );
        assert!(shared_identifiers(&ids(&["a"], &[]), &ids(&["b"], &[])).is_empty());
        let s = ids(&["a", "b"], &["g"]);
        assert_eq!(shared_identifiers(&s, &s), set(&["a", "b", "g"]));
    }

    #[test]
    fn link_examples() {
        let anchor = ids(&["a", "b", "c", "d"], &[]);
        let five = ids(&["a", "b", "c"], &[]);
        let other = ids(&["z"], &[]);
        let cells = vec![(0, &anchor), (3, &other), (5, &five)];
        assert_eq!(overlap_links(LinkQuery { anchor_index: 0, n: 2 }, &cells).unwrap(), vec![5]);
        assert!(overlap_links(LinkQuery { anchor_index: 0, n: 3 }, &cells).unwrap().is_empty());
        assert!(overlap_links(LinkQuery { anchor_index: 3, n: 0 }, &cells).unwrap().is_empty());
        assert!(matches!(
            overlap_links(LinkQuery { anchor_index: 9, n: 0 }, &cells),
            Err(Error::AnchorNotFound(9))
        ));
    }

    proptest::proptest! {
        #[test]
        fn extraction_is_total_and_deterministic(src in "\\PC{0,200}") {
            let a = extract_identifiers(&src);
            let b = extract_identifiers(&src);
            proptest::prop_assert_eq!(&a, &b);
            proptest::prop_assert!(a.variables.is_disjoint(&a.functions));
            for name in a.names() {
                proptest::prop_assert!(!is_keyword(name));
                proptest::prop_assert!(!name.starts_with(|c: char| c.is_ascii_digit()));
            }
        }

        #[test]
        fn links_shrink_as_threshold_grows(
            sets in proptest::collection::vec(proptest::collection::btree_set("[a-f]", 0..6), 1..10),
            n in 0usize..5,
        ) {
            let owned: Vec<IdentifierSet> = sets
                .into_iter()
                .map(|v| IdentifierSet { variables: v, functions: BTreeSet::new() })
                .collect();
            let cells: Vec<(usize, &IdentifierSet)> = owned.iter().enumerate().collect();
            let lo = overlap_links(LinkQuery { anchor_index: 0, n }, &cells).unwrap();
            let hi = overlap_links(LinkQuery { anchor_index: 0, n: n + 1 }, &cells).unwrap();
            proptest::prop_assert!(hi.iter().all(|i| lo.contains(i)));
            proptest::prop_assert!(!lo.contains(&0));
        }
    }
}
