// Client mirror of the server's training session. The mirror only moves
// along edges the server permits: describe -> proposed -> (accept existing |
// draft -> committed), with cancel returning to idle without a server write.

import { ApiClient, ApiRequestError, MacroDraft, Proposal } from "./api.js";

export type WizardStage = "idle" | "proposed" | "drafting" | "committed";

export class IllegalWizardMove extends Error {
  constructor(stage: WizardStage, action: string) {
    super(`cannot ${action} while ${stage}`);
  }
}

export class TrainingWizard {
  stage: WizardStage = "idle";
  description = "";
  sessionId: number | null = null;
  proposals: Proposal[] = [];
  acceptedId: number | null = null;
  committedId: number | null = null;
  lastError: string | null = null;

  constructor(private api: ApiClient, private k: number = 3) {}

  async describe(description: string): Promise<Proposal[]> {
    if (this.stage !== "idle") {
      throw new IllegalWizardMove(this.stage, "describe");
    }
    const response = await this.api.trainPropose(description, this.k);
    this.description = description;
    this.sessionId = response.session_id;
    this.proposals = response.proposals;
    this.stage = "proposed";
    this.lastError = null;
    return this.proposals;
  }

  acceptExisting(macroId: number): void {
    if (this.stage !== "proposed") {
      throw new IllegalWizardMove(this.stage, "accept an existing macro");
    }
    this.acceptedId = macroId;
    this.stage = "committed";
  }

  startDraft(): void {
    if (this.stage !== "proposed") {
      throw new IllegalWizardMove(this.stage, "start drafting");
    }
    this.stage = "drafting";
  }

  async commit(draft: MacroDraft): Promise<number> {
    if (this.stage !== "drafting") {
      throw new IllegalWizardMove(this.stage, "commit");
    }
    try {
      const response = await this.api.trainCommit(draft, this.sessionId);
      this.committedId = response.id;
      this.stage = "committed";
      this.lastError = null;
      return response.id;
    } catch (error) {
      if (error instanceof ApiRequestError) {
        // validation or conflict: the session stays in drafting for edits
        this.lastError = error.message;
        throw error;
      }
      throw error;
    }
  }

  cancel(): void {
    this.stage = "idle";
    this.description = "";
    this.sessionId = null;
    this.proposals = [];
    this.acceptedId = null;
    this.committedId = null;
    this.lastError = null;
  }
}
