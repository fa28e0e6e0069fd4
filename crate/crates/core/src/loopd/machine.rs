//! Big-step stack semantics. The forward pass pushes each primitive's
//! pre-state and backward map; the backward pass pops them in lockstep.

use std::fmt;

use super::{Command, LoopError, Primitive, StateModel};

/// The two stacks. The last element is the top.
pub struct Frame<S, T> {
    pub states: Vec<S>,
    pub commands: Vec<Primitive<S, T>>,
}

impl<S, T> Default for Frame<S, T> {
    fn default() -> Self {
        Frame {
            states: Vec::new(),
            commands: Vec::new(),
        }
    }
}

impl<S, T> Frame<S, T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Pushes another frame on top of this one.
    pub fn extend(&mut self, top: Frame<S, T>) {
        self.states.extend(top.states);
        self.commands.extend(top.commands);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Forward { prim: String, before: String, after: String },
    Backward { prim: String, popped: String, before: String, after: String },
    Branch { then: bool },
    Loop { enter: bool, guard: bool },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Forward { prim, before, after } => write!(f, "FWD\t{prim}\t{before}\t{after}"),
            Event::Backward { prim, popped, before, after } => {
                write!(f, "BWD\t{prim}\t{popped}\t{before}\t{after}")
            }
            Event::Branch { then } => write!(f, "BRANCH\t{}", if *then { "then" } else { "else" }),
            Event::Loop { enter, guard } => {
                write!(f, "LOOP\t{}\t{guard}", if *enter { "enter" } else { "exit" })
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<Event>,
}

impl Trace {
    pub fn forward_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Event::Forward { .. })).count()
    }

    pub fn backward_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Event::Backward { .. })).count()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

pub struct Outcome<S, T> {
    pub state: S,
    pub frame: Frame<S, T>,
    pub trace: Trace,
}

struct Forward<'a, M: StateModel> {
    model: &'a M,
    fuel: u64,
    trace: Trace,
}

impl<M: StateModel> Forward<'_, M> {
    fn tick(&mut self) -> Result<(), LoopError> {
        if self.fuel == 0 {
            return Err(LoopError::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn exec(&mut self, c: &Command, s: M::S, frame: &mut Frame<M::S, M::T>) -> Result<M::S, LoopError> {
        self.tick()?;
        match c {
            Command::Skip => Ok(s),
            Command::Prim(name) => {
                let p = self.model.primitive(name)?;
                let after = p.forward(&s)?;
                self.trace.events.push(Event::Forward {
                    prim: name.clone(),
                    before: s.to_string(),
                    after: after.to_string(),
                });
                frame.states.push(s);
                frame.commands.push(p);
                Ok(after)
            }
            Command::Seq(a, b) => {
                let mid = self.exec(a, s, frame)?;
                self.exec(b, mid, frame)
            }
            Command::If(guard, a, b) => {
                let then = guard.holds(self.model, &s, None)?;
                self.trace.events.push(Event::Branch { then });
                self.exec(if then { a } else { b }, s, frame)
            }
            Command::While(order, guard, body) => {
                let mut s = s;
                loop {
                    let holds = guard.holds(self.model, &s, None)?;
                    self.trace.events.push(Event::Loop { enter: holds, guard: holds });
                    if !holds {
                        return Ok(s);
                    }
                    let next = self.exec(body, s.clone(), frame)?;
                    if !self.model.below(order, &next, &s)? {
                        return Err(LoopError::DescentViolation {
                            order: order.to_string(),
                            at: s.to_string(),
                            after: next.to_string(),
                        });
                    }
                    self.tick()?;
                    s = next;
                }
            }
        }
    }
}

/// Runs `c` forward from `s`, returning the final state, the stacks built
/// and the forward trace.
pub fn forward_run<M: StateModel>(model: &M, c: &Command, s: M::S, fuel: u64) -> Result<Outcome<M::S, M::T>, LoopError> {
    let mut run = Forward {
        model,
        fuel,
        trace: Trace::default(),
    };
    let mut frame = Frame::default();
    let state = run.exec(c, s, &mut frame)?;
    Ok(Outcome {
        state,
        frame,
        trace: run.trace,
    })
}

/// Pops the top `count` entries of the frame, threading the dual through
/// their backward maps. Entries below them are left in place.
pub fn backward_run<M: StateModel>(
    frame: &mut Frame<M::S, M::T>,
    count: usize,
    t: M::T,
    trace: &mut Trace,
) -> Result<M::T, LoopError> {
    if frame.states.len() != frame.commands.len() {
        return Err(LoopError::StackMismatch {
            states: frame.states.len(),
            commands: frame.commands.len(),
        });
    }
    if count > frame.len() {
        return Err(LoopError::StackMismatch {
            states: frame.len(),
            commands: count,
        });
    }
    let mut t = t;
    for _ in 0..count {
        let (s, g) = (frame.states.pop().unwrap(), frame.commands.pop().unwrap());
        let after = g.backward(&s, &t)?;
        trace.events.push(Event::Backward {
            prim: g.name.clone(),
            popped: s.to_string(),
            before: t.to_string(),
            after: after.to_string(),
        });
        t = after;
    }
    Ok(t)
}

/// Forward pass then a full backward pass: `(C+ s, C- s t)` and the trace.
pub fn run<M: StateModel>(model: &M, c: &Command, s: M::S, t: M::T, fuel: u64) -> Result<(M::S, M::T, Trace), LoopError> {
    let mut out = forward_run(model, c, s, fuel)?;
    let n = out.frame.len();
    let t = backward_run::<M>(&mut out.frame, n, t, &mut out.trace)?;
    Ok((out.state, t, out.trace))
}
