"""The rearrangement is not continuous on BMO.

f_k = 1_(0,1) + (1/k)(-log|2x + 1|)_+ tends to f in BMO, but the
rearrangements stay at distance about 1/2 while converging in L1.
"""

from __future__ import annotations

from rearrbmo import converge_experiment
from rearrbmo.examples import rows_to_csv

print(rows_to_csv(converge_experiment("ex_discont", 5)), end="")
