"""
Network descriptors from published author and linkage counts
=============================================================

Density and average number of collaborators depend only on the number of
authors ``n`` and linkages ``m``.  Here we recompute them for the nine
domain windows and the three boundary-spanning windows of the study and
print them at the precision the study reports.
"""

from spanalyze.analysis import format_fixed
from spanalyze.graph import avg_collaborators_nm, density_nm

# (network, window, authors, linkages)
counts = [
    ("RET", "2002-2007", 102, 305), ("RET", "2005-2010", 197, 413), ("RET", "2008-2013", 323, 656),
    ("NNM", "2002-2007", 669, 1664), ("NNM", "2005-2010", 952, 2400), ("NNM", "2008-2013", 1305, 3607),
    ("EECS", "2002-2007", 453, 954), ("EECS", "2005-2010", 778, 1443), ("EECS", "2008-2013", 1082, 2289),
    ("boundary", "2002-2007", 92, 267), ("boundary", "2005-2010", 143, 323), ("boundary", "2008-2013", 237, 581),
]

print(f"{'network':<9} {'window':<10} {'n':>5} {'m':>5} {'avg':>4} {'density':>7}")
for net, win, n, m in counts:
    avg = format_fixed(avg_collaborators_nm(n, m), 1)
    dens = format_fixed(density_nm(n, m), 3)
    print(f"{net:<9} {win:<10} {n:>5} {m:>5} {avg:>4} {dens:>7}")

# Rounding is half-up, as in a printed table: 0.0125 becomes 0.013, not 0.012.
print(format_fixed(0.0125, 3))
