#!/usr/bin/env python3
"""One-step twins, two-step strangers.

A Hadamard rotation and its phase-dressed twin generate the *same* one-step
transition matrix: squared moduli are blind to phases. Follow either with a
second Hadamard and the twins separate completely: one composes to the
identity, the other to the full mix. The distinction lives in multi-time
memory, and an active readout channel makes it operational.

Run:  python3 demos/phase_memory.py
"""

import numpy as np

from stoqlift import (KrausMap, mod_square, modified_readout_kernel,
                      one_step_indistinguishable, povm_from_channel,
                      two_step_kernel)

np.set_printoptions(precision=4, suppress=True)

H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
D = np.diag([1.0, 1j])
u_x, u_y, v = H.astype(complex), D @ H, H.astype(complex)

print("one-step kernel of U_x (= squared moduli):")
print(mod_square(u_x))
print("one-step kernel of U_y = D U_x with a pure phase D:")
print(mod_square(u_y))
print("one-step indistinguishable:",
      one_step_indistinguishable(u_x, u_y))

print("\ntwo-step kernel after a further V = H:")
print("  with U_x:", np.array2string(two_step_kernel(v, u_x)).replace("\n", ""))
print("  with U_y:", np.array2string(two_step_kernel(v, u_y)).replace("\n", ""))
print("the squared-moduli map does not respect composition, so the phase")
print("difference becomes visible one step later.")

# The same information is reachable without a second evolution step: apply
# an active channel right before the configuration-basis readout. With a
# unitary channel this reproduces a projective measurement in its row basis.
readout_channel = KrausMap([v])
povm = povm_from_channel(readout_channel)
print("\nreadout POVM effects of the active channel V:")
for j, effect in enumerate(povm.effects):
    print(f"  E_{j} =", np.array2string(effect).replace("\n", ""))

for label, u in (("U_x", u_x), ("U_y", u_y)):
    modified = modified_readout_kernel(readout_channel, KrausMap([u]))
    print(f"modified readout kernel for {label}:",
          np.array2string(modified.matrix).replace("\n", ""))
