//! Value grammars of the configuration file: points, lists, domains,
//! perturbation coefficients and boundary data.

use std::f64::consts::PI;

use stablelab::estimators::BoundaryData;
use stablelab::geometry::{Ball, Domain, LipschitzGraph, Point};
use stablelab::kernels::BFunction;

/// A parsed call expression `name(arg, ...)` or a bare word or number.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Word(String),
    Call(String, Vec<Expr>),
}

impl Expr {
    fn num(&self) -> Result<f64, String> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Word(w) if w == "pi" => Ok(PI),
            _ => Err(format!("expected a number, got {self:?}")),
        }
    }

    fn name(&self) -> &str {
        match self {
            Expr::Num(_) => "",
            Expr::Word(w) | Expr::Call(w, _) => w,
        }
    }

    fn args(&self) -> &[Expr] {
        match self {
            Expr::Call(_, a) => a,
            _ => &[],
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expr(&mut self) -> Result<Expr, String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+' | '_')))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(format!("unexpected '{}' at offset {}", rest.chars().next().unwrap_or(' '), self.pos));
        }
        let tok = &rest[..len];
        self.pos += len;
        if let Ok(v) = tok.parse::<f64>() {
            return Ok(Expr::Num(v));
        }
        if self.peek() != Some('(') {
            return Ok(Expr::Word(tok.to_string()));
        }
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(Expr::Call(tok.to_string(), args));
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(Expr::Call(tok.to_string(), args));
                }
                _ => return Err(format!("expected ',' or ')' at offset {}", self.pos)),
            }
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, String> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(format!("trailing input '{}'", &src[p.pos..]));
    }
    Ok(e)
}

fn arity(e: &Expr, allowed: &[usize]) -> Result<(), String> {
    if allowed.contains(&e.args().len()) {
        Ok(())
    } else {
        Err(format!("'{}' takes {:?} arguments, got {}", e.name(), allowed, e.args().len()))
    }
}

fn nums(e: &Expr) -> Result<Vec<f64>, String> {
    e.args().iter().map(Expr::num).collect()
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    parse_expr(s)?.num()
}

/// `1.5, -2, 0`
pub fn parse_point(s: &str) -> Result<Point, String> {
    let v: Vec<f64> = s.split(',').map(|t| parse_f64(t.trim())).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err("empty point".into());
    }
    Ok(Point::from(v.as_slice()))
}

/// `0,1; 1,0.5`
pub fn parse_points(s: &str) -> Result<Vec<Point>, String> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_point).collect()
}

/// `1, 0.5, 0.25`
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_f64(t.trim())).collect()
}

fn graph(e: &Expr, d: usize, lambda0: f64) -> Result<LipschitzGraph, String> {
    let a = nums(e)?;
    let g = match e.name() {
        "flat" => {
            arity(e, &[0])?;
            LipschitzGraph::flat(d)
        }
        "abs-cone" => {
            arity(e, &[1])?;
            LipschitzGraph::abs_cone(d, a[0], lambda0).map_err(|x| x.to_string())?
        }
        "sine" => {
            arity(e, &[2])?;
            LipschitzGraph::sine(d, a[0], a[1], lambda0).map_err(|x| x.to_string())?
        }
        other => return Err(format!("unknown graph '{other}' (flat, abs-cone, sine)")),
    };
    Ok(g)
}

/// `ball(c1,...,cd,r)` | `halfspace(d)` | `halfspace(d,R)` |
/// `lipschitz(graph,lambda0)` | `lipschitz(graph,lambda0,R)` in dimension
/// `d`. The optional `R` intersects with `B(0,R)`.
pub fn parse_domain(s: &str, d: usize) -> Result<Domain, String> {
    let e = parse_expr(s)?;
    let bounded = |base: LipschitzGraph, r: Option<f64>| -> Result<Domain, String> {
        match r {
            None => Ok(Domain::Graph(base)),
            Some(r) => Domain::graph_ball(base, Ball::centered(d, r).map_err(|x| x.to_string())?).map_err(|x| x.to_string()),
        }
    };
    match e.name() {
        "ball" => {
            let a = nums(&e)?;
            if a.len() != d + 1 {
                return Err(format!("ball needs {d} centre coordinates and a radius"));
            }
            Domain::ball(Point::from(&a[..d]), a[d]).map_err(|x| x.to_string())
        }
        "halfspace" => {
            arity(&e, &[1, 2])?;
            let a = nums(&e)?;
            if a[0] != d as f64 {
                return Err(format!("halfspace({}) does not match d = {d}", a[0]));
            }
            match a.get(1) {
                None => Domain::half_space(d).map_err(|x| x.to_string()),
                Some(r) => bounded(LipschitzGraph::flat(d), Some(*r)),
            }
        }
        "lipschitz" => {
            arity(&e, &[2, 3])?;
            let args = e.args();
            let lambda0 = args[1].num()?;
            let g = graph(&args[0], d, lambda0)?;
            let r = args.get(2).map(Expr::num).transpose()?;
            bounded(g, r)
        }
        other => Err(format!("unknown domain '{other}' (ball, halfspace, lipschitz)")),
    }
}

/// The graph behind a `lipschitz(...)` or `halfspace(d)` domain string.
pub fn parse_graph(s: &str, d: usize) -> Result<LipschitzGraph, String> {
    match parse_domain(s, d)? {
        Domain::HalfSpace(d) => Ok(LipschitzGraph::flat(d)),
        Domain::Graph(g) => Ok(g),
        _ => Err(format!("'{s}' is not an unbounded graph domain")),
    }
}

/// `zero | const:<eps> | trunc:<c1> | truncbase:<c2>,<gamma> |
/// radial:<phi>,<psi> | sde:<C>`
pub fn parse_b(s: &str) -> Result<BFunction, String> {
    let s = s.trim();
    let (head, tail) = s.split_once(':').unwrap_or((s, ""));
    let args: Vec<&str> = tail.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("b = {head} takes {n} argument(s), got '{tail}'"))
        }
    };
    let num = |t: &str| parse_f64(t);
    let b = match head {
        "zero" => {
            want(0)?;
            BFunction::Zero
        }
        "const" => {
            want(1)?;
            BFunction::Constant(num(args[0])?)
        }
        "trunc" => {
            want(1)?;
            BFunction::TruncatedIndicator { c1: num(args[0])? }
        }
        "truncbase" => {
            want(2)?;
            BFunction::TruncatedWithBase {
                c2: num(args[0])?,
                gamma: num(args[1])?,
            }
        }
        "radial" => {
            want(2)?;
            BFunction::radial(args[0], args[1]).map_err(|x| x.to_string())?
        }
        "sde" => {
            want(1)?;
            BFunction::sde(args[0]).map_err(|x| x.to_string())?
        }
        other => return Err(format!("unknown b '{other}' (zero, const, trunc, truncbase, radial, sde)")),
    };
    Ok(b)
}

/// `slab(axis,lo,hi)` | `sector(c1,c2,r_in,r_out,theta_lo,theta_hi)` |
/// `w` | `power(p)` | `const(c)` | `scaled(c,data)`; `axis` counts from 1.
pub fn parse_data(s: &str, d: usize, alpha: f64) -> Result<BoundaryData, String> {
    data_expr(&parse_expr(s)?, d, alpha)
}

fn data_expr(e: &Expr, d: usize, alpha: f64) -> Result<BoundaryData, String> {
    let err = |x: stablelab::Error| x.to_string();
    match e.name() {
        "w" => {
            arity(e, &[0])?;
            Ok(BoundaryData::w_halfspace(alpha))
        }
        "power" => {
            arity(e, &[1])?;
            Ok(BoundaryData::HalfSpacePower {
                p: e.args()[0].num()?,
                cap: f64::MAX,
            })
        }
        "const" => {
            arity(e, &[1])?;
            Ok(BoundaryData::Constant(e.args()[0].num()?))
        }
        "slab" => {
            arity(e, &[3])?;
            let a = nums(e)?;
            let axis = a[0] as usize;
            if a[0].fract() != 0.0 || axis < 1 || axis > d {
                return Err(format!("slab axis must be an integer in 1..={d}, got {}", a[0]));
            }
            BoundaryData::slab(axis - 1, a[1], a[2]).map_err(err)
        }
        "sector" => {
            arity(e, &[6])?;
            let a = nums(e)?;
            let mut c = vec![0.0; d];
            c[0] = a[0];
            c[1] = a[1];
            BoundaryData::annulus_sector(Point::from(c.as_slice()), a[2], a[3], a[4], a[5]).map_err(err)
        }
        "scaled" => {
            arity(e, &[2])?;
            let c = e.args()[0].num()?;
            Ok(data_expr(&e.args()[1], d, alpha)?.scaled(c))
        }
        other => Err(format!("unknown data '{other}' (slab, sector, w, power, const, scaled)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_calls() {
        let e = parse_expr("lipschitz(sine(0.1, 2), 0.32, 8)").unwrap();
        assert_eq!(e.name(), "lipschitz");
        assert_eq!(e.args()[0], Expr::Call("sine".into(), vec![Expr::Num(0.1), Expr::Num(2.0)]));
        assert!(parse_expr("ball(0,0,1").is_err());
        assert!(parse_expr("ball(0,0,1) x").is_err());
    }

    #[test]
    fn domains() {
        assert!(matches!(parse_domain("halfspace(2)", 2), Ok(Domain::HalfSpace(2))));
        assert!(matches!(parse_domain("halfspace(2, 8)", 2), Ok(Domain::GraphBall(..))));
        assert!(matches!(parse_domain("ball(0,0,1)", 2), Ok(Domain::Ball(_))));
        assert!(matches!(parse_domain("lipschitz(abs-cone(0.5), 0.5)", 2), Ok(Domain::Graph(_))));
        assert!(parse_domain("halfspace(3)", 2).is_err());
        assert!(parse_domain("torus(1)", 2).is_err());
    }

    #[test]
    fn coefficients() {
        assert_eq!(parse_b("trunc:1").unwrap().describe(), "trunc:1");
        assert_eq!(parse_b("radial:bump,exp").unwrap().describe(), "radial:bump,exp");
        assert!(parse_b("const").is_err());
        assert!(parse_b("nope:1").is_err());
    }

    #[test]
    fn data() {
        let f = parse_data("scaled(2, slab(1, 3, 5))", 2, 1.0).unwrap();
        assert_eq!(f.eval(&[4.0, -1.0]), 2.0);
        assert_eq!(f.eval(&[2.0, -1.0]), 0.0);
        let s = parse_data("sector(0, 0, 2, 3, 0, pi)", 2, 1.0).unwrap();
        assert_eq!(s.eval(&[0.0, 2.5]), 1.0);
        assert!(parse_data("slab(3, 0, 1)", 2, 1.0).is_err());
    }

    #[test]
    fn points() {
        let p = parse_points("0,1; 1, 0.5").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[1].to_vec(), vec![1.0, 0.5]);
    }
}
