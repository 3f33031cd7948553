"""Population-coded leaky integrate-and-fire policy network.

State dimensions are encoded by overlapping Gaussian receptive fields (10
neurons per dimension); the resulting activations drive a fully connected
LIF network for a fixed number of timesteps, and output-layer spike counts
are decoded through a tanh readout into a bounded continuous action.

Training uses backprop-through-time with a rectangular surrogate derivative
at the spike threshold; everything here is plain numpy so gradients can be
checked at 64-bit precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend

STATE_DIM = 13
ACTION_DIM = 6
POP_SIZE = 10
ENCODER_SIZE = STATE_DIM * POP_SIZE  # 130
OUTPUT_SIZE = ACTION_DIM * POP_SIZE  # 60
HIDDEN_SIZE = 256
DEFAULT_TIMESTEPS = 9

DEG = math.pi / 180.0


class MissingTraceError(RuntimeError):
    """Backward pass requested without a stored forward trace."""


@dataclass
class LifParams:
    current_decay: float = 0.5
    voltage_decay: float = 0.75
    threshold: float = 0.5
    surrogate_width: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.current_decay <= 1.0 and 0.0 <= self.voltage_decay <= 1.0):
            raise ValueError("decay factors must lie in [0, 1]")
        if self.threshold <= 0.0:
            raise ValueError("threshold must be > 0")
        if self.surrogate_width <= 0.0:
            raise ValueError("surrogate width must be > 0")


def default_state_bounds():
    """Per-dimension normalization bounds for the 13-dim observation:
    position (m), orientation quaternion, force (N), torque (N*m)."""
    lo = np.array(
        [-0.06, -0.06, -0.08, -1, -1, -1, -1, -10, -10, -10, -1, -1, -1],
        dtype=np.float64,
    )
    hi = np.array(
        [0.06, 0.06, 0.04, 1, 1, 1, 1, 10, 10, 10, 1, 1, 1], dtype=np.float64
    )
    return lo, hi


@dataclass
class PopulationEncoder:
    centers: np.ndarray  # (STATE_DIM, POP_SIZE)
    widths: np.ndarray  # (STATE_DIM, POP_SIZE), > 0
    lo: np.ndarray  # (STATE_DIM,)
    hi: np.ndarray  # (STATE_DIM,)

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=np.float64)
        self.widths = np.asarray(self.widths, dtype=np.float64)
        self.lo = np.asarray(self.lo, dtype=np.float64)
        self.hi = np.asarray(self.hi, dtype=np.float64)
        if self.centers.shape != (STATE_DIM, POP_SIZE):
            raise ValueError(f"expected centers of shape {(STATE_DIM, POP_SIZE)}")
        if np.any(self.widths <= 0):
            raise ValueError("receptive-field widths must be > 0")
        if np.any(self.hi <= self.lo):
            raise ValueError("degenerate normalization bounds")

    @classmethod
    def default(cls, bounds=None) -> "PopulationEncoder":
        """Evenly spaced centers on [-1, 1]; width equal to the spacing."""
        lo, hi = bounds if bounds is not None else default_state_bounds()
        centers = np.tile(np.linspace(-1.0, 1.0, POP_SIZE), (STATE_DIM, 1))
        spacing = 2.0 / (POP_SIZE - 1)
        widths = np.full((STATE_DIM, POP_SIZE), spacing)
        return cls(centers=centers, widths=widths, lo=lo, hi=hi)

    def normalize(self, states: np.ndarray) -> np.ndarray:
        s = np.asarray(states, dtype=np.float64)
        return np.clip(2.0 * (s - self.lo) / (self.hi - self.lo) - 1.0, -1.0, 1.0)


def encode_state(state, enc: PopulationEncoder) -> np.ndarray:
    """Gaussian receptive-field activations, flattened to (130,) in [0, 1]."""
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (STATE_DIM,):
        raise ValueError(f"expected a {STATE_DIM}-dim state, got {state.shape}")
    if not np.all(np.isfinite(state)):
        raise ValueError("non-finite state component")
    ns = enc.normalize(state)
    act = np.exp(-((ns[:, None] - enc.centers) ** 2) / (2.0 * enc.widths**2))
    return act.reshape(ENCODER_SIZE)


def encode_batch(states: np.ndarray, enc: PopulationEncoder):
    """Batch encoding; returns (activations (B,130), normalized (B,13))."""
    states = np.asarray(states, dtype=np.float64)
    if not np.all(np.isfinite(states)):
        raise ValueError("non-finite state component")
    ns = enc.normalize(states)
    act = np.exp(-((ns[:, :, None] - enc.centers) ** 2) / (2.0 * enc.widths**2))
    return act.reshape(states.shape[0], ENCODER_SIZE), ns


@dataclass
class NeuronState:
    current: np.ndarray
    voltage: np.ndarray
    spikes: np.ndarray

    @classmethod
    def zeros(cls, width: int) -> "NeuronState":
        return cls(np.zeros(width), np.zeros(width), np.zeros(width))


def lif_step(state: NeuronState, input_current, p: LifParams):
    """One leaky integrate-and-fire update for a layer.

    current <- decay_c * current + input
    voltage <- decay_v * voltage * (1 - spiked_before) + current
    spike when voltage >= threshold (reset applied on the next step).
    """
    inp = np.asarray(input_current, dtype=np.float64)
    if inp.shape != state.current.shape:
        raise ValueError(
            f"input width {inp.shape} does not match layer width {state.current.shape}"
        )
    current = p.current_decay * state.current + inp
    voltage = p.voltage_decay * state.voltage * (1.0 - state.spikes) + current
    spikes = (voltage >= p.threshold).astype(np.float64)
    return NeuronState(current, voltage, spikes), spikes


@dataclass
class SpikeRaster:
    """Boolean spike matrices for one inference: (T, layer width) each."""

    hidden1: np.ndarray
    hidden2: np.ndarray
    output: np.ndarray

    def layer_sizes(self):
        return (self.hidden1.shape[1], self.hidden2.shape[1], self.output.shape[1])

    @property
    def timesteps(self) -> int:
        return self.hidden1.shape[0]


@dataclass
class SpikingActor:
    encoder: PopulationEncoder
    w1: np.ndarray  # (130, 256)
    b1: np.ndarray
    w2: np.ndarray  # (256, 256)
    b2: np.ndarray
    w3: np.ndarray  # (256, 60)
    b3: np.ndarray
    decoder: np.ndarray  # (6, 10)
    action_bounds: np.ndarray  # (6,)
    lif: LifParams = field(default_factory=LifParams)
    timesteps: int = DEFAULT_TIMESTEPS

    def __post_init__(self):
        shapes = {
            "w1": (ENCODER_SIZE, HIDDEN_SIZE),
            "b1": (HIDDEN_SIZE,),
            "w2": (HIDDEN_SIZE, HIDDEN_SIZE),
            "b2": (HIDDEN_SIZE,),
            "w3": (HIDDEN_SIZE, OUTPUT_SIZE),
            "b3": (OUTPUT_SIZE,),
            "decoder": (ACTION_DIM, POP_SIZE),
            "action_bounds": (ACTION_DIM,),
        }
        for name, shape in shapes.items():
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
            setattr(self, name, arr)
        if self.timesteps < 1:
            raise ValueError("timesteps must be >= 1")
        if np.any(self.action_bounds <= 0):
            raise ValueError("action bounds must be > 0")

    @classmethod
    def initialize(
        cls,
        seed: int | None = None,
        action_bounds=None,
        state_bounds=None,
        lif: LifParams | None = None,
        timesteps: int = DEFAULT_TIMESTEPS,
    ) -> "SpikingActor":
        rng = np.random.default_rng(seed)
        if action_bounds is None:
            action_bounds = np.concatenate([np.full(3, 0.005), np.full(3, DEG)])

        def uniform(fan_in, shape):
            lim = 1.0 / math.sqrt(fan_in)
            return rng.uniform(-lim, lim, shape)

        return cls(
            encoder=PopulationEncoder.default(state_bounds),
            w1=uniform(ENCODER_SIZE, (ENCODER_SIZE, HIDDEN_SIZE)),
            b1=np.zeros(HIDDEN_SIZE),
            w2=uniform(HIDDEN_SIZE, (HIDDEN_SIZE, HIDDEN_SIZE)),
            b2=np.zeros(HIDDEN_SIZE),
            w3=uniform(HIDDEN_SIZE, (HIDDEN_SIZE, OUTPUT_SIZE)),
            b3=np.zeros(OUTPUT_SIZE),
            decoder=uniform(POP_SIZE, (ACTION_DIM, POP_SIZE)),
            action_bounds=np.asarray(action_bounds, dtype=np.float64),
            lif=lif if lif is not None else LifParams(),
            timesteps=timesteps,
        )

    # -- parameter plumbing --------------------------------------------------

    WEIGHT_NAMES = ("w1", "b1", "w2", "b2", "w3", "b3", "decoder")
    PARAM_NAMES = WEIGHT_NAMES + ("enc_centers", "enc_widths")

    def parameters(self) -> dict:
        out = {name: getattr(self, name) for name in self.WEIGHT_NAMES}
        out["enc_centers"] = self.encoder.centers
        out["enc_widths"] = self.encoder.widths
        return out

    def set_parameters(self, params: dict):
        for name in self.WEIGHT_NAMES:
            getattr(self, name)[...] = params[name]
        self.encoder.centers[...] = params["enc_centers"]
        self.encoder.widths[...] = params["enc_widths"]

    def copy(self) -> "SpikingActor":
        return SpikingActor(
            encoder=PopulationEncoder(
                self.encoder.centers.copy(),
                self.encoder.widths.copy(),
                self.encoder.lo.copy(),
                self.encoder.hi.copy(),
            ),
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            w2=self.w2.copy(),
            b2=self.b2.copy(),
            w3=self.w3.copy(),
            b3=self.b3.copy(),
            decoder=self.decoder.copy(),
            action_bounds=self.action_bounds.copy(),
            lif=LifParams(
                self.lif.current_decay,
                self.lif.voltage_decay,
                self.lif.threshold,
                self.lif.surrogate_width,
            ),
            timesteps=self.timesteps,
        )


def decode_action(counts, decoder, bounds, timesteps: int) -> np.ndarray:
    """Spike counts (60,) -> bounded action (6,): per-dimension firing rates
    through a tanh readout. Output is strictly inside the bounds."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape != (OUTPUT_SIZE,):
        raise ValueError(f"expected {OUTPUT_SIZE} spike counts")
    if np.any(counts < 0) or np.any(counts > timesteps):
        raise ValueError(f"spike counts must lie in [0, {timesteps}]")
    rates = counts.reshape(ACTION_DIM, POP_SIZE) / timesteps
    u = np.einsum("dk,dk->d", np.asarray(decoder, dtype=np.float64), rates)
    return np.asarray(bounds) * np.tanh(u)


def actor_forward(actor: SpikingActor, state):
    """Deterministic single-state inference over ``actor.timesteps`` steps.

    Encoder activations are injected as a constant current each step.
    Returns (action (6,), SpikeRaster).
    """
    activations = encode_state(state, actor.encoder)
    inj = activations @ actor.w1 + actor.b1
    counts, s1, s2, s3 = backend.snn_forward(
        inj,
        actor.w2,
        actor.b2,
        actor.w3,
        actor.b3,
        actor.lif.current_decay,
        actor.lif.voltage_decay,
        actor.lif.threshold,
        actor.timesteps,
    )
    action = decode_action(
        counts.astype(np.float64), actor.decoder, actor.action_bounds, actor.timesteps
    )
    return action, SpikeRaster(hidden1=s1, hidden2=s2, output=s3)


@dataclass
class ForwardTrace:
    """Everything the surrogate-gradient backward pass needs."""

    activations: np.ndarray  # (B, 130)
    normalized: np.ndarray  # (B, 13)
    voltages: tuple  # three arrays (T, B, width), pre-threshold values
    spikes: tuple  # three arrays (T, B, width)
    rates: np.ndarray  # (B, 6, 10)
    tanh_u: np.ndarray  # (B, 6)
    timesteps: int


@dataclass
class ActorGradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    decoder: np.ndarray
    enc_centers: np.ndarray
    enc_widths: np.ndarray

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in SpikingActor.PARAM_NAMES}


def actor_forward_batch(actor: SpikingActor, states, record_trace: bool = False):
    """Batched forward pass in float64 numpy.

    Returns (actions (B, 6), ForwardTrace or None).
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    B = states.shape[0]
    T = actor.timesteps
    act, ns = encode_batch(states, actor.encoder)
    inj = act @ actor.w1 + actor.b1
    dc, dv, vth = actor.lif.current_decay, actor.lif.voltage_decay, actor.lif.threshold

    widths = (HIDDEN_SIZE, HIDDEN_SIZE, OUTPUT_SIZE)
    c = [np.zeros((B, w)) for w in widths]
    v = [np.zeros((B, w)) for w in widths]
    s = [np.zeros((B, w)) for w in widths]
    if record_trace:
        v_hist = tuple(np.empty((T, B, w)) for w in widths)
        s_hist = tuple(np.empty((T, B, w)) for w in widths)
    counts = np.zeros((B, OUTPUT_SIZE))

    for t in range(T):
        inputs = inj
        for layer in range(3):
            c[layer] = dc * c[layer] + inputs
            v[layer] = dv * v[layer] * (1.0 - s[layer]) + c[layer]
            s[layer] = (v[layer] >= vth).astype(np.float64)
            if record_trace:
                v_hist[layer][t] = v[layer]
                s_hist[layer][t] = s[layer]
            if layer == 0:
                inputs = s[0] @ actor.w2 + actor.b2
            elif layer == 1:
                inputs = s[1] @ actor.w3 + actor.b3
        counts += s[2]

    rates = counts.reshape(B, ACTION_DIM, POP_SIZE) / T
    u = np.einsum("bdk,dk->bd", rates, actor.decoder)
    tanh_u = np.tanh(u)
    actions = actor.action_bounds * tanh_u

    trace = None
    if record_trace:
        trace = ForwardTrace(
            activations=act,
            normalized=ns,
            voltages=v_hist,
            spikes=s_hist,
            rates=rates,
            tanh_u=tanh_u,
            timesteps=T,
        )
    return actions, trace


def actor_backward(actor: SpikingActor, trace: ForwardTrace, grad_actions) -> ActorGradients:
    """Backprop-through-time with a rectangular surrogate spike derivative:
    dH/dv = (1/w) * 1[|v - threshold| < w/2].

    `grad_actions` is dLoss/dAction of shape (B, 6); gradients are summed
    over the batch.
    """
    if trace is None:
        raise MissingTraceError("actor_backward needs the trace of a prior forward pass")
    grad_actions = np.atleast_2d(np.asarray(grad_actions, dtype=np.float64))
    B = grad_actions.shape[0]
    T = trace.timesteps
    if trace.activations.shape[0] != B:
        raise ValueError("trace batch size does not match upstream gradient")

    dc, dv, vth = actor.lif.current_decay, actor.lif.voltage_decay, actor.lif.threshold
    ws = actor.lif.surrogate_width

    # decode path (smooth)
    du = grad_actions * actor.action_bounds * (1.0 - trace.tanh_u**2)  # (B, 6)
    d_decoder = np.einsum("bd,bdk->dk", du, trace.rates)
    d_rates = du[:, :, None] * actor.decoder[None, :, :]  # (B, 6, 10)
    d_counts = d_rates.reshape(B, OUTPUT_SIZE) / T  # same for every timestep

    def surrogate(volts):
        return (np.abs(volts - vth) < 0.5 * ws).astype(np.float64) / ws

    def layer_bptt(v_hist, s_hist, ext_s_grad):
        """Run the within-layer recurrence backwards.

        ext_s_grad: (T, B, width) external dL/ds contributions per step.
        Returns dL/dc per step (T, B, width).
        """
        width = v_hist.shape[2]
        gc_all = np.empty((T, B, width))
        gv_next = np.zeros((B, width))
        gc_next = np.zeros((B, width))
        for t in range(T - 1, -1, -1):
            gs = ext_s_grad[t] - dv * v_hist[t] * gv_next  # reset path
            gv = gs * surrogate(v_hist[t]) + gv_next * dv * (1.0 - s_hist[t])
            gc = gv + dc * gc_next
            gc_all[t] = gc
            gv_next, gc_next = gv, gc
        return gc_all

    v1, v2, v3 = trace.voltages
    s1, s2, s3 = trace.spikes

    ext3 = np.broadcast_to(d_counts, (T, B, OUTPUT_SIZE))
    gc3 = layer_bptt(v3, s3, ext3)
    d_w3 = np.einsum("tbi,tbj->ij", s2, gc3)
    d_b3 = gc3.sum(axis=(0, 1))

    ext2 = gc3 @ actor.w3.T  # (T, B, 256)
    gc2 = layer_bptt(v2, s2, ext2)
    d_w2 = np.einsum("tbi,tbj->ij", s1, gc2)
    d_b2 = gc2.sum(axis=(0, 1))

    ext1 = gc2 @ actor.w2.T
    gc1 = layer_bptt(v1, s1, ext1)
    gc1_sum = gc1.sum(axis=0)  # (B, 256); injection is identical each step
    d_w1 = trace.activations.T @ gc1_sum
    d_b1 = gc1_sum.sum(axis=0)

    # encoder receptive fields
    d_act = gc1_sum @ actor.w1.T  # (B, 130)
    act = trace.activations.reshape(B, STATE_DIM, POP_SIZE)
    d_act = d_act.reshape(B, STATE_DIM, POP_SIZE)
    diff = trace.normalized[:, :, None] - actor.encoder.centers[None, :, :]
    inv_w2 = 1.0 / actor.encoder.widths**2
    d_centers = (d_act * act * diff * inv_w2).sum(axis=0)
    d_widths = (d_act * act * diff**2 * inv_w2 / actor.encoder.widths).sum(axis=0)

    return ActorGradients(
        w1=d_w1,
        b1=d_b1,
        w2=d_w2,
        b2=d_b2,
        w3=d_w3,
        b3=d_b3,
        decoder=d_decoder,
        enc_centers=d_centers,
        enc_widths=d_widths,
    )
