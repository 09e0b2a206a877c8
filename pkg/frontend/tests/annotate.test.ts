import { describe, expect, it } from "vitest";

import { AnnotationController } from "../src/annotate.js";
import { FakeApi, labelSet } from "./helpers.js";

function controller(api = new FakeApi()) {
  return { api, ctl: new AnnotationController(api.asClient(), labelSet(), "a1") };
}

describe("annotation flow", () => {
  it("cannot submit until a primary is chosen", async () => {
    const { ctl } = controller();
    await ctl.next();
    expect(ctl.canSubmit()).toBe(false);
    ctl.setPrimary("Revoicing");
    expect(ctl.canSubmit()).toBe(true);
  });

  it("selecting a primary auto-includes it in the acceptable set", async () => {
    const { ctl } = controller();
    await ctl.next();
    ctl.setPrimary("Restating");
    expect(ctl.acceptable.has("Restating")).toBe(true);
  });

  it("the primary cannot be toggled out of the acceptable set", async () => {
    const { ctl } = controller();
    await ctl.next();
    ctl.setPrimary("Wait");
    ctl.toggleAcceptable("Wait");
    expect(ctl.acceptable.has("Wait")).toBe(true);
    ctl.toggleAcceptable("None");
    expect(ctl.acceptable.has("None")).toBe(true);
    ctl.toggleAcceptable("None");
    expect(ctl.acceptable.has("None")).toBe(false);
  });

  it("submits the payload verbatim and advances", async () => {
    const { api, ctl } = controller();
    await ctl.next();
    const first = ctl.current!.example_id;
    ctl.setPrimary("Press for Accuracy");
    ctl.toggleAcceptable("Press for Reasoning");
    const outcome = await ctl.submit();
    expect(outcome).toBe("submitted");
    expect(api.submitted).toHaveLength(1);
    expect(api.submitted[0]).toEqual({
      annotator_id: "a1",
      example_id: first,
      primary: "Press for Accuracy",
      acceptable: ["Press for Accuracy", "Press for Reasoning"],
    });
    expect(ctl.current!.example_id).not.toBe(first);
    expect(ctl.primary).toBeNull(); // selection resets per example
  });

  it("reaches the done screen after the last example", async () => {
    const api = new FakeApi(2);
    const ctl = new AnnotationController(api.asClient(), labelSet(), "a1");
    await ctl.next();
    for (let i = 0; i < 2; i++) {
      ctl.setPrimary("None");
      await ctl.submit();
    }
    expect(ctl.finished).toBe(true);
    expect(ctl.progress).toEqual({ done: 2, total: 2 });
  });

  it("keeps unsent records in the retry buffer across network failures", async () => {
    const { api, ctl } = controller();
    await ctl.next();
    api.failNextSubmits = 1;
    ctl.setPrimary("Revoicing");
    const outcome = await ctl.submit();
    expect(outcome).toBe("buffered");
    expect(ctl.retryBuffer).toHaveLength(1);
    expect(api.submitted).toHaveLength(0);
    const sent = await ctl.retryPending();
    expect(sent).toBe(1);
    expect(ctl.retryBuffer).toHaveLength(0);
    expect(api.submitted).toHaveLength(1);
  });

  it("skips forward on 409 duplicates", async () => {
    const { api, ctl } = controller();
    await ctl.next();
    api.duplicateIds.add(ctl.current!.example_id);
    ctl.setPrimary("None");
    const outcome = await ctl.submit();
    expect(outcome).toBe("duplicate-skipped");
    expect(api.submitted).toHaveLength(0);
  });

  it("rejects labels the backend never served", async () => {
    const { ctl } = controller();
    await ctl.next();
    expect(() => ctl.setPrimary("Pontificating")).toThrow(/unknown label/);
  });
});
