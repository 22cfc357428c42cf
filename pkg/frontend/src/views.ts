/** Orthographic top (x,y) and side (x,z) work views.
 *
 * Both directions of the mapping are affine, so dragging unprojects
 * exactly onto the selected work plane.
 */

export type ViewKind = "top" | "side";

export interface Viewport {
  width: number;
  height: number;
  /** world coordinates of the viewport center */
  centerX: number;
  centerY: number; // world y (top) or z (side)
  pixelsPerMeter: number;
}

export interface View {
  kind: ViewKind;
  vp: Viewport;
  /** held coordinate of the work plane: z for top view, y for side view */
  plane: number;
}

export function worldToScreen(view: View, p: [number, number, number]): [number, number] {
  const { vp } = view;
  const u = view.kind === "top" ? p[1] : p[2];
  return [
    vp.width / 2 + (p[0] - vp.centerX) * vp.pixelsPerMeter,
    vp.height / 2 - (u - vp.centerY) * vp.pixelsPerMeter,
  ];
}

export function screenToWorld(view: View, sx: number, sy: number): [number, number, number] {
  const { vp } = view;
  const x = vp.centerX + (sx - vp.width / 2) / vp.pixelsPerMeter;
  const u = vp.centerY - (sy - vp.height / 2) / vp.pixelsPerMeter;
  return view.kind === "top" ? [x, u, view.plane] : [x, view.plane, u];
}
