/** Scenario editing state: hit-test the draggable elements (dockers,
 * obstacle, tunnel) and move them in world space. Saving posts the edited
 * geometry back as a new scenario (the store is content-addressed). */

import type { Point, ScenarioDict } from "./types.js";

export type SceneElement = "start" | "goal" | "obstacle" | "tunnel";

const HANDLE_RADIUS_WORLD = 0.05;

function elementPosition(scenario: ScenarioDict, element: SceneElement): Point | null {
  switch (element) {
    case "start":
      return [scenario.start.mouth[0], scenario.start.mouth[1]];
    case "goal":
      return scenario.goal ? [scenario.goal.mouth[0], scenario.goal.mouth[1]] : null;
    case "obstacle":
      return scenario.obstacle
        ? [scenario.obstacle.center[0], scenario.obstacle.center[1]]
        : null;
    case "tunnel":
      return scenario.tunnel
        ? [scenario.tunnel.entrance[0], scenario.tunnel.entrance[1]]
        : null;
  }
}

export class ScenarioEditor {
  scenario: ScenarioDict;
  dragging: SceneElement | null = null;

  constructor(scenario: ScenarioDict) {
    this.scenario = JSON.parse(JSON.stringify(scenario));
  }

  elements(): SceneElement[] {
    const out: SceneElement[] = ["start"];
    if (this.scenario.goal) out.push("goal");
    if (this.scenario.obstacle) out.push("obstacle");
    if (this.scenario.tunnel) out.push("tunnel");
    return out;
  }

  hitTest(world: Point): SceneElement | null {
    for (const element of this.elements()) {
      const pos = elementPosition(this.scenario, element);
      if (pos === null) continue;
      const d = Math.hypot(world[0] - pos[0], world[1] - pos[1]);
      if (d <= HANDLE_RADIUS_WORLD) return element;
    }
    return null;
  }

  beginDrag(world: Point): SceneElement | null {
    this.dragging = this.hitTest(world);
    return this.dragging;
  }

  dragTo(world: Point): void {
    if (this.dragging === null) return;
    this.moveElement(this.dragging, world);
  }

  endDrag(): void {
    this.dragging = null;
  }

  moveElement(element: SceneElement, world: Point): void {
    const p = [world[0], world[1]];
    switch (element) {
      case "start":
        this.scenario.start.mouth = p;
        break;
      case "goal":
        if (this.scenario.goal) this.scenario.goal.mouth = p;
        break;
      case "obstacle":
        if (this.scenario.obstacle) this.scenario.obstacle.center = p;
        break;
      case "tunnel":
        if (this.scenario.tunnel) this.scenario.tunnel.entrance = p;
        break;
    }
  }
}
