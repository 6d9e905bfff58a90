//! Configuration-to-graph compilation.
//!
//! Blocks and cells are visited in instance order. Each cell's result is
//! routed by its `Output` choice: `CellOutput` parks it in a pending list with
//! a countdown equal to `relativeIndex`, `BlockOutput` hands it to the next
//! block, `OutOutput` sends it to the classifier head.

use crate::fm::{Configuration, InstancePath, Segment, Value};

use super::graph::{ArchitectureGraph, CompileError, CompileErrorKind as K, DatasetSpec, Element, Node, Site};
use super::layer::{count_params, infer_shape, Activation, Layer, Padding, PoolType, TensorShape};

pub const BLOCK: &str = "Block";
pub const CELL: &str = "Cell";

/// A cell result waiting for the cell it is routed to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingEntry {
    pub node: usize,
    pub counter: u32,
    /// 1-based cell index that produced the entry.
    pub from_cell: u32,
}

/// Cell outputs in push order. An entry is active when its counter is zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PendingOutputs {
    entries: Vec<PendingEntry>,
}

impl PendingOutputs {
    pub fn push(&mut self, entry: PendingEntry) {
        self.entries.push(entry);
    }

    /// Removes and returns the active entries, oldest first.
    pub fn take_active(&mut self) -> Vec<PendingEntry> {
        let (active, rest): (Vec<_>, Vec<_>) = self.entries.drain(..).partition(|e| e.counter == 0);
        self.entries = rest;
        active
    }

    /// Decrements every remaining counter. Called after active entries are taken,
    /// so no counter is zero here.
    pub fn decrement(&mut self) {
        for e in &mut self.entries {
            e.counter = e.counter.saturating_sub(1);
        }
    }

    pub fn entries(&self) -> &[PendingEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum InputChoice {
    Zeros,
    Identity,
    Layer(Layer),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Cell(u32),
    Block,
    Out,
}

#[derive(Debug, Clone, PartialEq)]
struct CellSpec {
    inputs: [InputChoice; 2],
    ops: [Option<Layer>; 2],
    combination: Layer,
    route: Route,
}

struct Reader<'a> {
    config: &'a Configuration,
    block: u32,
    cell: u32,
}

impl Reader<'_> {
    fn malformed(&self, message: impl std::fmt::Display) -> CompileError {
        CompileError::new(K::MalformedConfiguration, format!("block {} cell {}: {message}", self.block, self.cell))
    }

    /// The single selected child under `parent`.
    fn choice(&self, parent: &InstancePath) -> Result<(String, InstancePath), CompileError> {
        let children = selected_children(self.config, parent);
        match children.as_slice() {
            [only] => Ok((only.last().map(|s| s.name.clone()).unwrap_or_default(), only.clone())),
            [] => Err(self.malformed(format_args!("nothing selected under `{parent}`"))),
            _ => Err(self.malformed(format_args!("several choices selected under `{parent}`"))),
        }
    }

    fn value(&self, owner: &InstancePath, attr: &str) -> Result<&Value, CompileError> {
        self.config
            .binding(owner, attr)
            .ok_or_else(|| self.malformed(format_args!("`{owner}` has no `{attr}`")))
    }

    fn int(&self, owner: &InstancePath, attr: &str) -> Result<u64, CompileError> {
        self.value(owner, attr)?
            .as_int()
            .and_then(|v| u64::try_from(v).ok())
            .ok_or_else(|| self.malformed(format_args!("`{owner}.{attr}` is not a non-negative integer")))
    }

    fn positive(&self, owner: &InstancePath, attr: &str) -> Result<u64, CompileError> {
        match self.int(owner, attr)? {
            0 => Err(self.malformed(format_args!("`{owner}.{attr}` must be positive"))),
            v => Ok(v),
        }
    }

    fn token<T>(&self, owner: &InstancePath, attr: &str, parse: fn(&str) -> Option<T>) -> Result<T, CompileError> {
        let v = self.value(owner, attr)?;
        v.as_token()
            .and_then(parse)
            .ok_or_else(|| self.malformed(format_args!("`{owner}.{attr}` has unsupported value `{v}`")))
    }

    fn input(&self, cell: &InstancePath, element: &str) -> Result<InputChoice, CompileError> {
        let (name, p) = self.choice(&cell.child(Segment::single(element)))?;
        Ok(match name.as_str() {
            "Zeros" => InputChoice::Zeros,
            "Identity" => InputChoice::Identity,
            "Dense" => InputChoice::Layer(Layer::Dense {
                neurons: self.positive(&p, "neuron_number")?,
                activation: self.token(&p, "activation", Activation::from_token)?,
            }),
            "Convolution" => InputChoice::Layer(Layer::Convolution {
                kernel: self.positive(&p, "kernel")?,
                filters: self.positive(&p, "filters_number")?,
                stride: self.positive(&p, "stride")?,
                padding: self.token(&p, "padding", Padding::from_token)?,
                activation: self.token(&p, "activation", Activation::from_token)?,
            }),
            "Pooling" => InputChoice::Layer(Layer::Pooling {
                kernel: self.positive(&p, "kernel")?,
                stride: self.positive(&p, "stride")?,
                padding: self.token(&p, "padding", Padding::from_token)?,
                pool: self.token(&p, "type", PoolType::from_token)?,
            }),
            other => return Err(self.malformed(format_args!("unknown input kind `{other}`"))),
        })
    }

    fn operation(&self, cell: &InstancePath, element: &str) -> Result<Option<Layer>, CompileError> {
        let (name, p) = self.choice(&cell.child(Segment::single(element)))?;
        Ok(match name.as_str() {
            "Void" => None,
            "Flatten" => Some(Layer::Flatten),
            "Padding" => Some(Layer::Padding { amount: self.positive(&p, "amount")? }),
            "Activation" => Some(Layer::Activation { function: self.token(&p, "function", Activation::from_token)? }),
            "Dropout" => {
                let v = self.value(&p, "rate")?;
                let rate = v
                    .as_f64()
                    .filter(|r| (0.0..1.0).contains(r))
                    .ok_or_else(|| self.malformed(format_args!("dropout rate `{v}` outside [0, 1)")))?;
                Some(Layer::Dropout { rate })
            }
            "BatchNormalization" => Some(Layer::BatchNorm),
            other => return Err(self.malformed(format_args!("unknown operation `{other}`"))),
        })
    }

    fn cell_spec(&self, cell: &InstancePath) -> Result<CellSpec, CompileError> {
        let combination = match self.choice(&cell.child(Segment::single("Combination")))?.0.as_str() {
            "Sum" => Layer::Sum,
            "Concat" => Layer::Concat,
            "Product" => Layer::Product,
            other => return Err(self.malformed(format_args!("unknown combination `{other}`"))),
        };
        let (out, p) = self.choice(&cell.child(Segment::single("Output")))?;
        let route = match out.as_str() {
            "CellOutput" => {
                let r = self.int(&p, "relativeIndex")?;
                Route::Cell(u32::try_from(r).map_err(|_| self.malformed("relativeIndex too large"))?)
            }
            "BlockOutput" => Route::Block,
            "OutOutput" => Route::Out,
            other => return Err(self.malformed(format_args!("unknown output `{other}`"))),
        };
        Ok(CellSpec {
            inputs: [self.input(cell, "Input1")?, self.input(cell, "Input2")?],
            ops: [self.operation(cell, "Operation1")?, self.operation(cell, "Operation2")?],
            combination,
            route,
        })
    }
}

fn selected_children(config: &Configuration, parent: &InstancePath) -> Vec<InstancePath> {
    let depth = parent.segments().len();
    config
        .selections
        .range(parent.clone()..)
        .take_while(|p| p.segments().starts_with(parent.segments()))
        .filter(|p| p.segments().len() == depth + 1)
        .cloned()
        .collect()
}

/// Selected instance indices of the multi-feature `name` under `parent`,
/// checked to form `1..=n`.
fn instance_count(config: &Configuration, parent: &InstancePath, name: &str) -> Result<u32, CompileError> {
    let mut idx: Vec<u32> = selected_children(config, parent)
        .iter()
        .filter_map(|p| p.last().filter(|s| s.name == name).and_then(|s| s.index))
        .collect();
    idx.sort_unstable();
    for (i, k) in idx.iter().enumerate() {
        if *k != i as u32 + 1 {
            let at = if parent.is_root() { String::new() } else { format!(" in `{parent}`") };
            return Err(CompileError::new(
                K::MissingPredecessorBlock,
                format!("{name}#{k} exists without {name}#{}{at}", i + 1),
            ));
        }
    }
    Ok(idx.len() as u32)
}

struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    fn shape(&self, id: usize) -> &TensorShape {
        &self.nodes[id].out_shape
    }

    fn add(&mut self, layer: Layer, inputs: Vec<usize>, site: Option<Site>) -> Result<usize, CompileError> {
        let in_shapes: Vec<TensorShape> = inputs.iter().map(|&i| self.shape(i).clone()).collect();
        let out_shape = infer_shape(&layer, &in_shapes).map_err(|e| {
            let at = match site {
                Some(s) => format!("block {} cell {} {}", s.block, s.cell, s.element.as_str()),
                None => "classifier head".to_string(),
            };
            CompileError::new(e.kind.into(), format!("{at}: {}", e.message))
        })?;
        let params = count_params(&layer, &in_shapes);
        let id = self.nodes.len();
        self.nodes.push(Node { id, layer, inputs, in_shapes, out_shape, params, site });
        Ok(id)
    }

    fn build_cell(&mut self, spec: &CellSpec, sources: [usize; 2], block: u32, cell: u32) -> Result<usize, CompileError> {
        let site = |element| Some(Site { block, cell, element });
        let in_el = [Element::Input1, Element::Input2];
        let op_el = [Element::Operation1, Element::Operation2];
        let mut branch: [Option<usize>; 2] = [None, None];
        for k in 0..2 {
            let t = match &spec.inputs[k] {
                InputChoice::Zeros => continue,
                InputChoice::Identity => sources[k],
                InputChoice::Layer(l) => self.add(l.clone(), vec![sources[k]], site(in_el[k]))?,
            };
            branch[k] = Some(match &spec.ops[k] {
                None => t,
                Some(op) => self.add(op.clone(), vec![t], site(op_el[k]))?,
            });
        }
        let operands = match branch {
            [Some(a), Some(b)] => [a, b],
            [None, None] => {
                return Err(CompileError::new(
                    K::MalformedConfiguration,
                    format!("block {block} cell {cell}: both inputs are zeros"),
                ))
            }
            [Some(a), None] | [None, Some(a)] => {
                let z = if branch[0].is_none() { 0 } else { 1 };
                if spec.ops[z].is_none() && spec.combination == Layer::Sum {
                    return Ok(a);
                }
                let zeros = self.add(Layer::Zeros, vec![a], site(in_el[z]))?;
                let zeros = match &spec.ops[z] {
                    None => zeros,
                    Some(op) => self.add(op.clone(), vec![zeros], site(op_el[z]))?,
                };
                if z == 0 { [zeros, a] } else { [a, zeros] }
            }
        };
        self.add(spec.combination.clone(), operands.to_vec(), site(Element::Combination))
    }
}

/// Compiles a configuration of the block/cell model into an architecture graph.
pub fn compile(config: &Configuration, dataset: &DatasetSpec) -> Result<ArchitectureGraph, CompileError> {
    let root = InstancePath::root();
    let n_blocks = instance_count(config, &root, BLOCK)?;
    let mut b = Builder { nodes: Vec::new() };
    b.nodes.push(Node {
        id: 0,
        layer: Layer::Input,
        inputs: Vec::new(),
        in_shapes: Vec::new(),
        out_shape: dataset.input.clone(),
        params: 0,
        site: None,
    });
    let input = 0;
    let mut block_inputs = vec![input];
    let mut outs: Vec<usize> = Vec::new();

    for bi in 1..=n_blocks {
        let block_path = root.child(Segment::indexed(BLOCK, bi));
        let n_cells = instance_count(config, &block_path, CELL)?;
        if n_cells == 0 {
            return Err(CompileError::new(K::MalformedConfiguration, format!("block {bi} has no cells")));
        }
        let mut pending = PendingOutputs::default();
        let mut next_inputs = Vec::new();
        for ci in 1..=n_cells {
            let cell_path = block_path.child(Segment::indexed(CELL, ci));
            let reader = Reader { config, block: bi, cell: ci };
            let spec = reader.cell_spec(&cell_path)?;

            let active = pending.take_active();
            pending.decrement();
            let sources: Vec<usize> =
                if active.is_empty() { block_inputs.clone() } else { active.iter().map(|e| e.node).collect() };
            let at = format!("block {bi} cell {ci}");
            let wants_one = spec.inputs.contains(&InputChoice::Zeros);
            let pair = match sources.as_slice() {
                [] => return Err(CompileError::new(K::BlockWithoutInput, format!("{at}: no input available"))),
                [a] => [*a, *a],
                [a, c] if !wants_one => [*a, *c],
                _ => {
                    let cap = if wants_one { 1 } else { 2 };
                    return Err(CompileError::new(
                        K::FanInExceeded,
                        format!("{at}: targeted by {} outputs, accepts {cap}", sources.len()),
                    ));
                }
            };
            let result = b.build_cell(&spec, pair, bi, ci)?;
            match spec.route {
                Route::Cell(r) => {
                    if ci as u64 + r as u64 + 1 > n_cells as u64 {
                        return Err(CompileError::new(
                            K::RelativeIndexOverrun,
                            format!("{at}: relativeIndex {r} targets cell {} of {n_cells}", ci as u64 + r as u64 + 1),
                        ));
                    }
                    pending.push(PendingEntry { node: result, counter: r, from_cell: ci });
                }
                Route::Block => {
                    if bi == n_blocks {
                        return Err(CompileError::new(
                            K::BlockOutputWithoutNextBlock,
                            format!("{at}: block output in the last block"),
                        ));
                    }
                    next_inputs.push(result);
                }
                Route::Out => outs.push(result),
            }
        }
        if let Some(e) = pending.entries().first() {
            return Err(CompileError::new(
                K::DanglingPendingOutput,
                format!("block {bi}: output of cell {} is never consumed", e.from_cell),
            ));
        }
        if bi < n_blocks {
            if next_inputs.is_empty() {
                return Err(CompileError::new(
                    K::BlockWithoutInput,
                    format!("block {} receives no block output", bi + 1),
                ));
            }
            block_inputs = next_inputs;
        }
    }

    if n_blocks == 0 {
        outs.push(input);
    }
    if outs.is_empty() {
        return Err(CompileError::new(K::NoNetworkOutput, "no cell routes to the network output"));
    }
    let mut head: Option<usize> = None;
    for t in outs {
        let flat = if b.shape(t).rank() > 1 { b.add(Layer::Flatten, vec![t], None)? } else { t };
        head = Some(match head {
            None => flat,
            Some(h) => b.add(Layer::Concat, vec![h, flat], None)?,
        });
    }
    let head = head.expect("at least one output");
    let classifier = b.add(Layer::Classifier { classes: dataset.classes }, vec![head], None)?;
    let total_size = b.nodes.iter().map(|n| n.params).sum();
    Ok(ArchitectureGraph { dataset: dataset.clone(), nodes: b.nodes, input, classifier, total_size })
}
