/**
 * Viewer state and the pure command reducer.
 *
 * The engine streams relative increments; applying them is order-dependent
 * but fully deterministic, so any command sequence replayed from the same
 * start state reaches the same end state. Display scales live here, on the
 * viewer side, so tuning how far a gesture moves the camera never changes
 * what the engine logs.
 */

export type CommandKind = "NONE" | "SHIFT" | "ROTATE" | "ZOOM";

export interface EngineCommand {
  seq: number;
  kind: CommandKind;
  dx: number;
  dy: number;
  dzoom: number;
  /** Active engine mode; informational, drives the UI indicator. */
  mode?: CommandKind;
}

export interface ViewerScales {
  /** scene units of pan per unit of normalized displacement */
  pan: number;
  /** radians of orbit per unit of normalized displacement */
  orbit: number;
  /** exponent scale: zoom factor multiplies by exp(-dzoom * zoom) */
  zoom: number;
}

export const DEFAULT_SCALES: ViewerScales = { pan: 2.0, orbit: 3.0, zoom: 10.0 };

/** Pitch stays strictly inside (-pi/2, pi/2) to avoid pole flips. */
export const PITCH_LIMIT = Math.PI / 2 - 1e-6;

const ZOOM_MIN = 1e-9;
const ZOOM_MAX = 1e9;

export interface ViewerState {
  panX: number;
  panY: number;
  yaw: number;
  pitch: number;
  /** multiplicative zoom factor, always > 0 */
  zoom: number;
  connected: boolean;
  /** engine clock minus local clock, microseconds (from the handshake) */
  clockOffsetUs: number;
}

export function initialState(): ViewerState {
  return { panX: 0, panY: 0, yaw: 0, pitch: 0, zoom: 1, connected: false, clockOffsetUs: 0 };
}

function clampPitch(p: number): number {
  return Math.min(PITCH_LIMIT, Math.max(-PITCH_LIMIT, p));
}

/**
 * Apply one command. SHIFT pans the camera target, ROTATE orbits
 * (yaw from dx, pitch from dy), ZOOM multiplies the zoom factor by
 * exp(-dzoom * scale) so a positive dzoom — fingers opening — zooms out.
 * NONE and unknown kinds leave the state untouched.
 */
export function applyCommand(
  state: ViewerState,
  cmd: EngineCommand,
  scales: ViewerScales = DEFAULT_SCALES,
): ViewerState {
  switch (cmd.kind) {
    case "SHIFT":
      return {
        ...state,
        panX: state.panX + cmd.dx * scales.pan,
        panY: state.panY + cmd.dy * scales.pan,
      };
    case "ROTATE":
      return {
        ...state,
        yaw: state.yaw + cmd.dx * scales.orbit,
        pitch: clampPitch(state.pitch + cmd.dy * scales.orbit),
      };
    case "ZOOM": {
      const factor = state.zoom * Math.exp(-cmd.dzoom * scales.zoom);
      return { ...state, zoom: Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, factor)) };
    }
    default:
      return state;
  }
}

export function applyAll(
  state: ViewerState,
  commands: Iterable<EngineCommand>,
  scales: ViewerScales = DEFAULT_SCALES,
): ViewerState {
  let s = state;
  for (const cmd of commands) s = applyCommand(s, cmd, scales);
  return s;
}
