/** Portal session: where the backend lives and which token we hold.
 *
 * Roles come from static bearer tokens the backend config maps to
 * role names; the portal never decides roles itself, it only asks the
 * operator which token to use and lets the server accept or refuse.
 */

import { Role } from "./api.js";

export interface PortalSession {
  baseUrl: string;
  token: string;
  role: Role;
}

const ROLES: Role[] = ["health-center", "advisory-board", "ops"];

export function parseRole(value: string): Role {
  if ((ROLES as string[]).includes(value)) {
    return value as Role;
  }
  throw new Error(`unknown role "${value}", expected one of ${ROLES.join(", ")}`);
}

/** Demo tokens issued by `proxtrace serve --seed-demo`. */
export const DEMO_TOKENS: Record<Role, string> = {
  "health-center": "demo-health-token",
  "advisory-board": "demo-board-token",
  ops: "demo-ops-token",
};

export function demoSession(baseUrl: string, role: Role): PortalSession {
  return { baseUrl, token: DEMO_TOKENS[role], role };
}
