use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_pdf, sigmoid, softplus, INV_SQRT_2PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// Operation tag of a recorded node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// Differentiable leaf.
    Input,
    /// Leaf treated as a constant.
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Ln,
    Sin,
    Cos,
    Tanh,
    Gelu,
    Silu,
    Softplus,
    Sigmoid,
    Sqrt,
    Max,
    Pow2,
    NormCdf,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Input | Op::Const => 0,
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Max => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Input => "input",
            Op::Const => "const",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Neg => "neg",
            Op::Exp => "exp",
            Op::Ln => "ln",
            Op::Sin => "sin",
            Op::Cos => "cos",
            Op::Tanh => "tanh",
            Op::Gelu => "gelu",
            Op::Silu => "silu",
            Op::Softplus => "softplus",
            Op::Sigmoid => "sigmoid",
            Op::Sqrt => "sqrt",
            Op::Max => "max",
            Op::Pow2 => "pow2",
            Op::NormCdf => "normcdf",
        }
    }

    const ALL: [Op; 20] = [
        Op::Input,
        Op::Const,
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Div,
        Op::Neg,
        Op::Exp,
        Op::Ln,
        Op::Sin,
        Op::Cos,
        Op::Tanh,
        Op::Gelu,
        Op::Silu,
        Op::Softplus,
        Op::Sigmoid,
        Op::Sqrt,
        Op::Max,
        Op::Pow2,
        Op::NormCdf,
    ];

    /// Value and partials with respect to the parents.
    fn eval(self, a: f64, b: f64) -> (f64, [f64; 2]) {
        match self {
            Op::Input | Op::Const => (a, [0.0, 0.0]),
            Op::Add => (a + b, [1.0, 1.0]),
            Op::Sub => (a - b, [1.0, -1.0]),
            Op::Mul => (a * b, [b, a]),
            Op::Div => (a / b, [1.0 / b, -a / (b * b)]),
            Op::Neg => (-a, [-1.0, 0.0]),
            Op::Exp => {
                let y = a.exp();
                (y, [y, 0.0])
            }
            Op::Ln => (a.ln(), [1.0 / a, 0.0]),
            Op::Sin => {
                let (s, c) = a.sin_cos();
                (s, [c, 0.0])
            }
            Op::Cos => {
                let (s, c) = a.sin_cos();
                (c, [-s, 0.0])
            }
            Op::Tanh => {
                let y = a.tanh();
                (y, [1.0 - y * y, 0.0])
            }
            Op::Gelu => {
                let cdf = normal_cdf(a);
                (a * cdf, [cdf + a * normal_pdf(a), 0.0])
            }
            Op::Silu => {
                let s = sigmoid(a);
                (a * s, [s + a * s * (1.0 - s), 0.0])
            }
            Op::Softplus => (softplus(a), [sigmoid(a), 0.0]),
            Op::Sigmoid => {
                let s = sigmoid(a);
                (s, [s * (1.0 - s), 0.0])
            }
            Op::Sqrt => {
                let y = a.sqrt();
                (y, [0.5 / y, 0.0])
            }
            Op::Max => {
                if a >= b {
                    (a, [1.0, 0.0])
                } else {
                    (b, [0.0, 1.0])
                }
            }
            Op::Pow2 => (a * a, [2.0 * a, 0.0]),
            Op::NormCdf => (normal_cdf(a), [normal_pdf(a), 0.0]),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = Error;

    fn from_str(s: &str) -> Result<Op> {
        Op::ALL
            .iter()
            .copied()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown autodiff operation tag `{s}`")))
    }
}

/// One recorded operation.
#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    pub op: Op,
    pub parents: [NodeId; 2],
    pub value: f64,
    /// Partials of this node with respect to each parent, evaluated at the
    /// recorded parent values. Unused slots are zero.
    pub local_grads: [f64; 2],
}

impl Node {
    pub fn parents(&self) -> &[NodeId] {
        &self.parents[..self.op.arity()]
    }
}

/// Append-only record of scalar operations.
#[derive(Debug, Default, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
    input_ids: Vec<NodeId>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn value(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.input_ids
    }

    fn push_leaf(&mut self, op: Op, value: f64) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            id,
            op,
            parents: [id, id],
            value,
            local_grads: [0.0, 0.0],
        });
        id
    }

    /// A differentiable leaf variable.
    pub fn input(&mut self, value: f64) -> NodeId {
        let id = self.push_leaf(Op::Input, value);
        self.input_ids.push(id);
        id
    }

    pub fn constant(&mut self, value: f64) -> NodeId {
        self.push_leaf(Op::Const, value)
    }

    /// Records `op` applied to `parents`, checking arity and that every
    /// parent is already on the tape.
    pub fn record(&mut self, op: Op, parents: &[NodeId]) -> Result<NodeId> {
        if op.arity() == 0 {
            return Err(Error::Config(format!(
                "`{op}` is a leaf; use input() or constant()"
            )));
        }
        if parents.len() != op.arity() {
            return Err(Error::Config(format!(
                "`{op}` takes {} parent(s), got {}",
                op.arity(),
                parents.len()
            )));
        }
        if let Some(p) = parents.iter().find(|p| p.0 >= self.nodes.len()) {
            return Err(Error::Config(format!(
                "parent {} is not on the tape (len {})",
                p.0,
                self.nodes.len()
            )));
        }
        Ok(self.push_op(op, parents[0], *parents.get(1).unwrap_or(&parents[0])))
    }

    fn push_op(&mut self, op: Op, a: NodeId, b: NodeId) -> NodeId {
        let av = self.nodes[a.0].value;
        let bv = self.nodes[b.0].value;
        let (value, local_grads) = op.eval(av, bv);
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            id,
            op,
            parents: [a, b],
            value,
            local_grads,
        });
        id
    }

    /// Reverse accumulation from `output` with seed 1. Nodes are visited in
    /// strictly descending id order, each exactly once.
    pub fn backward(&self, output: NodeId) -> Gradients {
        let mut adjoint = vec![0.0; output.0 + 1];
        adjoint[output.0] = 1.0;
        for i in (0..=output.0).rev() {
            let a = adjoint[i];
            if a == 0.0 {
                continue;
            }
            let node = &self.nodes[i];
            for (slot, p) in node.parents().iter().enumerate() {
                adjoint[p.0] += a * node.local_grads[slot];
            }
        }
        Gradients { adjoint }
    }
}

/// Adjoints produced by one reverse sweep.
#[derive(Debug, Clone)]
pub struct Gradients {
    adjoint: Vec<f64>,
}

impl Gradients {
    /// Gradient with respect to `id`; nodes the output does not depend on
    /// (including nodes recorded after it) get 0.
    pub fn get(&self, id: NodeId) -> f64 {
        self.adjoint.get(id.0).copied().unwrap_or(0.0)
    }

    /// Gradient for every leaf input of `tape`, in creation order.
    pub fn for_inputs(&self, tape: &Tape) -> Vec<(NodeId, f64)> {
        tape.inputs().iter().map(|&id| (id, self.get(id))).collect()
    }
}

/// Handle to a node on a shared tape, with operator overloading.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    pub(crate) tape: &'t RefCell<Tape>,
    pub id: NodeId,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var({}, {})", self.id.0, self.value())
    }
}

impl<'t> Var<'t> {
    pub fn input(tape: &'t RefCell<Tape>, value: f64) -> Self {
        let id = tape.borrow_mut().input(value);
        Var { tape, id }
    }

    pub fn constant(tape: &'t RefCell<Tape>, value: f64) -> Self {
        let id = tape.borrow_mut().constant(value);
        Var { tape, id }
    }

    pub fn value(&self) -> f64 {
        self.tape.borrow().value(self.id)
    }

    pub(crate) fn unary(self, op: Op) -> Self {
        let id = self.tape.borrow_mut().push_op(op, self.id, self.id);
        Var { tape: self.tape, id }
    }

    pub(crate) fn binary(self, op: Op, other: Self) -> Self {
        debug_assert!(std::ptr::eq(self.tape, other.tape), "vars from different tapes");
        let id = self.tape.borrow_mut().push_op(op, self.id, other.id);
        Var { tape: self.tape, id }
    }

    /// `exp(-x^2/2)/sqrt(2 pi)` assembled from primitives.
    pub(crate) fn normal_pdf(self) -> Self {
        let half = Var::constant(self.tape, -0.5);
        let scale = Var::constant(self.tape, INV_SQRT_2PI);
        (half * self.unary(Op::Pow2)).unary(Op::Exp) * scale
    }
}

/// Forward-mode pair whose primal and tangent both live on the tape.
#[derive(Clone, Copy, Debug)]
pub struct TapeDual<'t> {
    pub primal: Var<'t>,
    pub tangent: Var<'t>,
}

/// Evaluates `f` at `inputs` together with its directional derivative along
/// `direction`. Both results are tape nodes: a later [`Tape::backward`] from
/// the derivative node differentiates through the inner derivative.
pub fn directional_value_and_grad<'t, F>(
    inputs: &[Var<'t>],
    direction: &[f64],
    f: F,
) -> (Var<'t>, Var<'t>)
where
    F: FnOnce(&[TapeDual<'t>]) -> TapeDual<'t>,
{
    assert_eq!(inputs.len(), direction.len(), "direction length mismatch");
    let duals: Vec<TapeDual<'t>> = inputs
        .iter()
        .zip(direction)
        .map(|(&v, &d)| TapeDual {
            primal: v,
            tangent: Var::constant(v.tape, d),
        })
        .collect();
    let out = f(&duals);
    (out.primal, out.tangent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_add_and_mul() {
        let mut t = Tape::new();
        let a = t.input(2.0);
        let b = t.input(3.0);
        let s = t.record(Op::Add, &[a, b]).unwrap();
        assert_eq!(t.value(s), 5.0);
        assert_eq!(t.node(s).local_grads, [1.0, 1.0]);
        let p = t.record(Op::Mul, &[a, b]).unwrap();
        assert_eq!(t.value(p), 6.0);
        assert_eq!(t.node(p).local_grads, [3.0, 2.0]);
    }

    #[test]
    fn record_softplus_at_zero() {
        let mut t = Tape::new();
        let x = t.input(0.0);
        let y = t.record(Op::Softplus, &[x]).unwrap();
        assert!((t.value(y) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(t.node(y).local_grads[0], 0.5);
    }

    #[test]
    fn record_rejects_bad_arity_and_dangling_parents() {
        let mut t = Tape::new();
        let a = t.input(1.0);
        assert!(matches!(t.record(Op::Mul, &[a]), Err(Error::Config(_))));
        assert!(matches!(
            t.record(Op::Exp, &[NodeId(7)]),
            Err(Error::Config(_))
        ));
        assert!(matches!(t.record(Op::Input, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_tag_is_a_configuration_error() {
        assert_eq!("normcdf".parse::<Op>().unwrap(), Op::NormCdf);
        assert!(matches!("relu6".parse::<Op>(), Err(Error::Config(_))));
    }

    #[test]
    fn backward_product_and_exp() {
        let mut t = Tape::new();
        let x = t.input(2.0);
        let y = t.input(3.0);
        let f = t.record(Op::Mul, &[x, y]).unwrap();
        let g = t.backward(f);
        assert_eq!(g.get(x), 3.0);
        assert_eq!(g.get(y), 2.0);

        let mut t = Tape::new();
        let x = t.input(0.0);
        let f = t.record(Op::Exp, &[x]).unwrap();
        assert_eq!(t.backward(f).get(x), 1.0);
    }

    #[test]
    fn dangling_leaves_get_zero() {
        let mut t = Tape::new();
        let x = t.input(1.5);
        let unused = t.input(4.0);
        let f = t.record(Op::Sin, &[x]).unwrap();
        let g = t.backward(f);
        assert_eq!(g.get(unused), 0.0);
        assert_eq!(g.for_inputs(&t).len(), 2);
    }

    #[test]
    fn parents_precede_children() {
        let tape = RefCell::new(Tape::new());
        let x = Var::input(&tape, 0.4);
        let y = Var::input(&tape, -1.3);
        let _ = (x * y).unary(Op::Tanh) + x.unary(Op::Gelu);
        let tape = tape.into_inner();
        for i in 0..tape.len() {
            let n = tape.node(NodeId(i));
            assert!(n.parents().iter().all(|p| p.0 < i));
        }
    }
}
