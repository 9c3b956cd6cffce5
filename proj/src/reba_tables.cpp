#include "ergoseg/reba.hpp"

namespace ergoseg {

// Bin edges and lookup tables transcribed from the published REBA worksheet
// (Hignett & McAtamney, Applied Ergonomics 31, 2000). Kept as parseable text
// so a replacement file can override the transcription.
const char* RebaTables::default_text() {
  return R"(# REBA scoring tables.
#
# Bin sections list "lo hi = score" intervals over the angle in degrees;
# the first interval containing the angle wins. Signed angles are positive
# in flexion and negative in extension.
#
# The legs score assumes bilateral weight bearing (base 1) plus the knee
# flexion increments; unilateral stance is not detectable from joints alone.
# Wrist deviation/twist and shoulder-raise increments are likewise not
# derivable from these joint sets, so those rows stop at their base scores.

[bins.trunk]
0 0 = 1
0 20 = 2
20 60 = 3
60 180 = 4
-20 0 = 2
-180 -20 = 3

[bins.neck]
0 20 = 1
20 180 = 2
-180 0 = 2

[bins.legs]
0 30 = 1
30 60 = 2
60 180 = 3

[bins.upper_arm]
-20 20 = 1
20 45 = 2
45 90 = 3
90 180 = 4
-180 -20 = 2

[bins.lower_arm]
60 100 = 1
0 60 = 2
100 180 = 2

[bins.wrist]
0 15 = 1
15 180 = 2

# neck trunk = value for legs 1..4
[table_a]
1 1 = 1 2 3 4
1 2 = 2 3 4 5
1 3 = 2 4 5 6
1 4 = 3 5 6 7
1 5 = 4 6 7 8
2 1 = 1 3 4 5
2 2 = 3 4 5 6
2 3 = 4 5 6 7
2 4 = 5 6 7 8
2 5 = 6 7 8 9
3 1 = 3 3 5 6
3 2 = 4 5 6 7
3 3 = 5 6 7 8
3 4 = 6 7 8 9
3 5 = 7 8 9 9

# lower_arm upper_arm = value for wrist 1..3
[table_b]
1 1 = 1 2 2
1 2 = 1 2 3
1 3 = 3 4 5
1 4 = 4 5 5
1 5 = 6 7 8
1 6 = 7 8 8
2 1 = 1 2 3
2 2 = 2 3 4
2 3 = 4 5 5
2 4 = 5 6 7
2 5 = 8 8 9
2 6 = 8 9 9

# score_a = value for score_b 1..12
[table_c]
1 = 1 1 1 2 3 3 4 5 6 7 7 7
2 = 1 2 2 3 4 4 5 6 6 7 7 8
3 = 2 3 3 3 4 5 6 7 7 8 8 8
4 = 3 4 4 4 5 6 7 8 8 9 9 9
5 = 4 4 4 5 6 7 8 8 9 9 9 9
6 = 6 6 6 7 8 8 9 9 10 10 10 10
7 = 7 7 7 8 9 9 9 10 10 11 11 11
8 = 8 8 8 9 10 10 10 10 10 11 11 11
9 = 9 9 9 10 10 10 11 11 11 12 12 12
10 = 10 10 10 11 11 11 11 12 12 12 12 12
11 = 11 11 11 11 12 12 12 12 12 12 12 12
12 = 12 12 12 12 12 12 12 12 12 12 12 12
)";
}

}  // namespace ergoseg
