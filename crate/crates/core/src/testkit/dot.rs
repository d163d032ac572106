//! A checker for the Graphviz DOT language grammar (graphs, subgraphs,
//! node/edge/attribute statements, ports, quoted and HTML ids).

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Colon,
    Equals,
    Edge(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                i += 2;
                while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                    i += 1;
                }
                if i + 1 >= chars.len() {
                    return Err("unterminated comment".into());
                }
                i += 2;
            }
            '#' if i == 0 || chars[i - 1] == '\n' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' | '}' | '[' | ']' | ';' | ',' | ':' | '=' => {
                tokens.push(match c {
                    '{' => Token::LBrace,
                    '}' => Token::RBrace,
                    '[' => Token::LBracket,
                    ']' => Token::RBracket,
                    ';' => Token::Semi,
                    ',' => Token::Comma,
                    ':' => Token::Colon,
                    _ => Token::Equals,
                });
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                tokens.push(Token::Edge("->"));
                i += 2;
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                tokens.push(Token::Edge("--"));
                i += 2;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                tokens.push(Token::Id(s));
            }
            '<' => {
                let mut depth = 0;
                let start = i;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated HTML id".into()),
                        Some('<') => depth += 1,
                        Some('>') => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                i += 1;
                tokens.push(Token::Id(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' => {
                let start = i;
                if c == '-' {
                    i += 1;
                }
                let mut dots = 0;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    if chars[i] == '.' {
                        dots += 1;
                    }
                    i += 1;
                }
                let numeral: String = chars[start..i].iter().collect();
                if dots > 1 || !numeral.chars().any(|d| d.is_ascii_digit()) {
                    return Err(format!("bad numeral `{numeral}`"));
                }
                tokens.push(Token::Id(numeral));
            }
            c if c.is_alphabetic() || c == '_' || !c.is_ascii() => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || !chars[i].is_ascii()) {
                    i += 1;
                }
                tokens.push(Token::Id(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    edge_op: &'static str,
}

fn is_keyword(id: &str, kw: &str) -> bool {
    id.eq_ignore_ascii_case(kw)
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token::Id(id)) if is_keyword(id, kw))
    }

    fn expect(&mut self, token: Token) -> Result<(), String> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!(
                "expected {token:?}, found {:?} at token {}",
                self.peek(),
                self.pos
            ))
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.peek() {
            Some(Token::Id(id)) => {
                let id = id.clone();
                self.pos += 1;
                Ok(id)
            }
            other => Err(format!("expected ID, found {other:?} at token {}", self.pos)),
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        if self.peek_keyword("strict") {
            self.pos += 1;
        }
        if self.peek_keyword("digraph") {
            self.edge_op = "->";
        } else if self.peek_keyword("graph") {
            self.edge_op = "--";
        } else {
            return Err("expected `graph` or `digraph`".into());
        }
        self.pos += 1;
        if matches!(self.peek(), Some(Token::Id(_))) {
            self.pos += 1;
        }
        self.expect(Token::LBrace)?;
        self.stmt_list()?;
        self.expect(Token::RBrace)?;
        if self.pos != self.tokens.len() {
            return Err("trailing tokens after graph".into());
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(Token::RBrace) | None) {
            self.stmt()?;
            if self.peek() == Some(&Token::Semi) {
                self.pos += 1;
            }
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), String> {
        if self.peek_keyword("graph") || self.peek_keyword("node") || self.peek_keyword("edge") {
            self.pos += 1;
            return self.attr_list();
        }
        if self.peek_keyword("subgraph") || self.peek() == Some(&Token::LBrace) {
            self.subgraph()?;
            return self.edge_rhs_opt();
        }
        let _ = self.id()?;
        if self.peek() == Some(&Token::Equals) {
            self.pos += 1;
            return self.id().map(|_| ());
        }
        self.port_opt()?;
        self.edge_rhs_opt()
    }

    fn edge_rhs_opt(&mut self) -> Result<(), String> {
        while let Some(Token::Edge(op)) = self.peek() {
            if *op != self.edge_op {
                return Err(format!("edge operator `{op}` not allowed in this graph"));
            }
            self.pos += 1;
            if self.peek_keyword("subgraph") || self.peek() == Some(&Token::LBrace) {
                self.subgraph()?;
            } else {
                self.id()?;
                self.port_opt()?;
            }
        }
        if self.peek() == Some(&Token::LBracket) {
            self.attr_list()?;
        }
        Ok(())
    }

    fn port_opt(&mut self) -> Result<(), String> {
        for _ in 0..2 {
            if self.peek() == Some(&Token::Colon) {
                self.pos += 1;
                self.id()?;
            }
        }
        Ok(())
    }

    fn subgraph(&mut self) -> Result<(), String> {
        if self.peek_keyword("subgraph") {
            self.pos += 1;
            if matches!(self.peek(), Some(Token::Id(_))) {
                self.pos += 1;
            }
        }
        self.expect(Token::LBrace)?;
        self.stmt_list()?;
        self.expect(Token::RBrace)
    }

    fn attr_list(&mut self) -> Result<(), String> {
        self.expect(Token::LBracket)?;
        loop {
            loop {
                match self.peek() {
                    Some(Token::RBracket) => break,
                    Some(Token::Id(_)) => {
                        self.id()?;
                        self.expect(Token::Equals)?;
                        self.id()?;
                        if matches!(self.peek(), Some(Token::Semi | Token::Comma)) {
                            self.pos += 1;
                        }
                    }
                    other => return Err(format!("bad attribute list at {other:?}")),
                }
            }
            self.expect(Token::RBracket)?;
            if self.peek() != Some(&Token::LBracket) {
                return Ok(());
            }
            self.pos += 1;
        }
    }
}

/// Checks `text` against the DOT grammar.
pub fn validate(text: &str) -> Result<(), String> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        edge_op: "->",
    };
    parser.graph()
}

/// Quoted node statements `"label";` in a digraph produced by the report
/// renderer, in order.
pub fn node_labels(text: &str) -> Vec<String> {
    edge_free_lines(text)
        .filter_map(|line| {
            line.strip_prefix('"')?
                .strip_suffix("\";")
                .map(|s| s.replace("\\\"", "\""))
        })
        .collect()
}

fn edge_free_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.contains("->"))
}

/// `(source, target, label)` for each edge statement produced by the report
/// renderer.
pub fn edges(text: &str) -> Vec<(String, String, String)> {
    text.lines()
        .map(str::trim)
        .filter_map(|line| {
            let (lhs, rest) = line.split_once(" -> ")?;
            let (rhs, attrs) = rest.split_once(" [label=")?;
            let label = attrs.strip_suffix("];")?;
            let unquote = |s: &str| s.trim_matches('"').replace("\\\"", "\"");
            Some((unquote(lhs), unquote(rhs), unquote(label)))
        })
        .collect()
}
