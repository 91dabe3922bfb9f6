/** Typed client for the goal-graph HTTP service.
 *
 * The UI never recomputes the calculus: every number it shows comes from
 * these endpoints.
 */

import type {
  AttributionJson,
  DiagnosticJson,
  DiffJson,
  ModelJson,
  PromptJson,
  ReportJson,
} from "./types.js";

export interface EvalOptionsBody {
  use_confidence?: boolean;
  use_calibration?: boolean;
  or_policy?: "explicit" | "best" | "pessimistic";
  or_selection?: Record<string, string>;
}

export interface ScenarioOverride {
  set_amount?: { link: string; value: number; unit: string };
  set_confidence?: { link: string; value: number };
  include_requirement?: { id: string; included: boolean };
  select_or?: { group: string; link: string };
}

export interface ScenarioBody {
  name?: string;
  overrides: ScenarioOverride[];
  options?: EvalOptionsBody;
}

export interface PutModelResult {
  ok: boolean;
  diagnostics: DiagnosticJson[];
}

/** What the app needs from the service; tests substitute a fake. */
export interface GoalService {
  getModel(): Promise<ModelJson>;
  getModelText(): Promise<string>;
  putModel(model: ModelJson): Promise<PutModelResult>;
  evaluate(options?: EvalOptionsBody): Promise<ReportJson>;
  whatif(body: ScenarioBody): Promise<DiffJson>;
  prompts(): Promise<PromptJson[]>;
  attribution(from: string, to: string): Promise<AttributionJson>;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient implements GoalService {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    if (!response.ok) {
      let code = "http-error";
      let message = `${response.status} on ${path}`;
      try {
        const body = (await response.json()) as { error?: { code: string; message: string } };
        if (body.error) {
          code = body.error.code;
          message = body.error.message;
        }
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  getModel(): Promise<ModelJson> {
    return this.json("/model");
  }

  async getModelText(): Promise<string> {
    return (await this.request("/model.galign")).text();
  }

  putModel(model: ModelJson): Promise<PutModelResult> {
    return this.json("/model", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(model),
    });
  }

  evaluate(options?: EvalOptionsBody): Promise<ReportJson> {
    return this.json("/evaluate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(options ?? {}),
    });
  }

  whatif(body: ScenarioBody): Promise<DiffJson> {
    return this.json("/whatif", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async prompts(): Promise<PromptJson[]> {
    const data = await this.json<{ prompts: PromptJson[] }>("/prompts");
    return data.prompts;
  }

  attribution(from: string, to: string): Promise<AttributionJson> {
    const params = new URLSearchParams({ from, to });
    return this.json(`/attribution?${params.toString()}`);
  }
}
