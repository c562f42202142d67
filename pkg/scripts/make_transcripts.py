#!/usr/bin/env python3
"""Regenerate the bundled replay suite under tests/data/suite/.

Each task gets a JSONL transcript produced by running the real pipeline
against a canned backend, so the recorded prompts (and their hashes)
always match what the pipeline will ask during a strict replay.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from uclgen.llm import MockBackend, RecordingBackend, Transcript  # noqa: E402
from uclgen.pipeline import STATUS_SUCCESS, run_pipeline  # noqa: E402

SUITE_DIR = ROOT / "tests" / "data" / "suite"

TRAFFIC_LIGHT_TASK = (
    "Model a state machine describing a traffic light at a pedestrian "
    "crosswalk. This is a time triggered machine that assumes it will react "
    "once per second. It starts in the red state and counts 60 seconds with "
    "the help of the variable count. It then transitions to green, where it "
    "will remain until the pure input pedestrian is present. That input is "
    "generated by some other subsystem that detects when a pedestrian is "
    "present, and should be modelled as nondeterministic. When pedestrian is "
    "present, the machine transitions to yellow if it has been green for at "
    "least 60 seconds. Otherwise, it transitions to pending, where it stays "
    "for the remainder of the 60 second interval. This ensures that once the "
    "light goes green, it stays green for at least 60 seconds. At the end of "
    "60 seconds, it will transition to yellow."
)

TRAFFIC_LIGHT_NEXT = '''\
    def next(self):
        if self.state == 0:
            self.sigG = False
            self.sigY = False
            self.sigR = True
            self.count = 0
            if self.count < 60:
                self.count += 1
            else:
                self.state = 1
        elif self.state == 1:
            self.sigR = False
            self.sigY = False
            self.sigG = True
            if self.pedestrian:
                if self.count >= 60:
                    self.state = 2
                else:
                    self.state = 3
        elif self.state == 2:
            self.sigG = False
            self.sigY = True
            self.sigR = False
            if self.count < 5:
                self.count += 1
            else:
                self.state = 0
        elif self.state == 3:
            self.sigG = False
            self.sigY = False
            self.sigR = False
            if self.count < 60:
                self.count += 1
            else:
                self.state = 0
'''

TRAFFIC_LIGHT_RESPONSE_1 = f'''\
class TrafficLight(Module):
    def types(self):
        self.state_t = BitVector(2)
    def locals(self):
        self.state = BitVector(2)
        self.count = BitVector(6)
        self.pedestrian = Boolean()
        self.sigG = Boolean()
        self.sigY = Boolean()
        self.sigR = Boolean()
    def inputs(self):
        self.pedestrian = Boolean()
    def outputs(self):
        self.sigG = Boolean()
        self.sigY = Boolean()
        self.sigR = Boolean()
    def init(self):
        self.state = BitVector(2)
        self.count = BitVector(6)
        self.pedestrian = Boolean()
        self.sigG = Boolean()
        self.sigY = Boolean()
        self.sigR = Boolean()
{TRAFFIC_LIGHT_NEXT}```
'''

TRAFFIC_LIGHT_RESPONSE_2 = f'''\
class TrafficLight(Module):
    def locals(self):
        self.state = 0
        self.count = 0
        self.pedestrian = False
    def outputs(self):
        self.sigG = False
        self.sigY = False
        self.sigR = False
    def init(self):
        self.state = 0
        self.count = 0
        self.pedestrian = False
        self.sigG = False
        self.sigY = False
        self.sigR = True
{TRAFFIC_LIGHT_NEXT}```
'''

#: (task id, task text, list of canned backend responses)
TASKS: list[tuple[str, str, list[str]]] = [
    (
        "traffic_light",
        TRAFFIC_LIGHT_TASK,
        [TRAFFIC_LIGHT_RESPONSE_1, TRAFFIC_LIGHT_RESPONSE_2],
    ),
    (
        "counter",
        "Model a counter that starts at zero, increments once per step, and "
        "wraps back to zero after reaching ten.",
        ['''\
class Counter(Module):
    def locals(self):
        self.count = int
    def init(self):
        self.count = 0
    def next(self):
        if self.count >= 10:
            self.count = 0
        else:
            self.count = self.count + 1
    def specification(self):
        return self.count <= 10
```
'''],
    ),
    (
        "toggle",
        "Model a single light that toggles between on and off every step, "
        "starting off.",
        ['''\
Sure, here is a simple toggle machine:
```
class Toggle(Module):
    def locals(self):
        self.on = bool
    def init(self):
        self.on = False
    def next(self):
        self.on = not self.on
```
'''],
    ),
    (
        "thermostat",
        "Model a thermostat that turns a heater on when the sensed "
        "temperature drops below 18.0 degrees and off once it rises above "
        "22.0 degrees. The temperature is a nondeterministic real input.",
        ['''\
class Thermostat(Module):
    def inputs(self):
        self.temperature = real
    def locals(self):
        self.heating = bool
    def init(self):
        self.heating = False
    def next(self):
        if self.temperature < 18.0:
            self.heating = True
        elif self.temperature > 22.0:
            self.heating = False
```
'''],
    ),
    (
        "saturating_counter",
        "Model a 4-bit saturating counter: it increments every step but "
        "sticks at its maximum value of 15 instead of wrapping.",
        ['''\
class SaturatingCounter(Module):
    def locals(self):
        self.count = BitVector(4)
    def init(self):
        self.count = BV(0, 4)
    def next(self):
        if self.count != BV(15, 4):
            self.count = self.count + BV(1, 4)
```
'''],
    ),
    (
        "mode_switch",
        "Model a device with three modes OFF, ON, and AUTO. A boolean button "
        "input cycles the device to the next mode each time it is pressed.",
        ['''\
class ModeSwitch(Module):
    def inputs(self):
        self.button = bool
    def locals(self):
        self.mode = Enum("OFF", "ON", "AUTO")
    def init(self):
        self.mode = "OFF"
    def next(self):
        if self.button:
            if self.mode == "OFF":
                self.mode = "ON"
            elif self.mode == "ON":
                self.mode = "AUTO"
            else:
                self.mode = "OFF"
```
'''],
    ),
    (
        "memory",
        "Model a simple memory that writes a nondeterministic integer input "
        "to consecutive addresses, one per step, starting at address zero.",
        ['''\
class SimpleMemory(Module):
    def inputs(self):
        self.data = int
    def locals(self):
        self.cells = Array(int, int)
        self.addr = int
    def init(self):
        self.addr = 0
    def next(self):
        self.cells[self.addr] = self.data
        self.addr = self.addr + 1
    def specification(self):
        return self.addr >= 0
```
'''],
    ),
    (
        "parity",
        "Model a parity tracker: given a nondeterministic boolean input bit, "
        "maintain whether an odd number of set bits has been seen so far.",
        ['''\
class ParityTracker(Module):
    def inputs(self):
        self.bit = bool
    def locals(self):
        self.odd = bool
    def init(self):
        self.odd = False
    def next(self):
        self.odd = self.odd ^ self.bit
```
'''],
    ),
    (
        "timer",
        "Model a countdown timer that is reloaded with a nondeterministic "
        "non-negative value whenever it reaches zero, and otherwise counts "
        "down by one per step.",
        ['''\
class CountdownTimer(Module):
    def locals(self):
        self.remaining = int
    def init(self):
        self.remaining = 0
    def next(self):
        if self.remaining == 0:
            havoc(self.remaining)
            assume(self.remaining >= 0)
        else:
            self.remaining = self.remaining - 1
    def specification(self):
        return self.remaining >= 0
```
'''],
    ),
    (
        "divider",
        "Model a machine that divides a fixed dividend of 100 by a divisor "
        "that increases by one each step starting from one, keeping the "
        "quotient and remainder in state variables.",
        ['''\
class Divider(Module):
    def locals(self):
        self.divisor = int
        self.quotient = int
        self.remainder = int
    def init(self):
        self.divisor = 1
        self.quotient = 100
        self.remainder = 0
    def next(self):
        self.quotient = 100 // self.divisor
        self.remainder = 100 % self.divisor
        self.divisor = self.divisor + 1
```
'''],
    ),
]


def main() -> int:
    SUITE_DIR.mkdir(parents=True, exist_ok=True)
    suite = []
    ok = True
    for task_id, task, responses in TASKS:
        transcript = Transcript()
        backend = RecordingBackend(MockBackend(responses), transcript)
        outcome = run_pipeline(task, backend)
        expected_calls = len(responses)
        if outcome.status != STATUS_SUCCESS or outcome.iterations != expected_calls:
            ok = False
            print(
                f"{task_id}: status={outcome.status} "
                f"iterations={outcome.iterations} (expected {expected_calls})"
            )
            for d in outcome.diagnostics:
                print(f"  {d}")
            continue
        name = f"{task_id}.jsonl"
        transcript.save(SUITE_DIR / name)
        suite.append({"id": task_id, "task": task, "transcript": name})
        print(f"{task_id}: ok ({outcome.iterations} call(s))")
    (SUITE_DIR / "suite.json").write_text(
        json.dumps(suite, indent=2) + "\n", encoding="utf-8"
    )
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
