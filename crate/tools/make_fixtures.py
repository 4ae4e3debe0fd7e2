#!/usr/bin/env python3
"""Build the exception-list fixture files under data/ and sanity-check counts."""
import hashlib
import pathlib

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
DATA.mkdir(exist_ok=True)

CUBIC_146 = [
    101, 103, 107, 109, 113, 121, 125, 127, 131, 137, 139, 149, 151, 157,
    163, 169, 179, 181, 191, 193, 197, 199, 211, 223, 229, 233, 239, 241,
    243, 251, 256, 263, 269, 271, 277, 281, 283, 289, 307, 311, 313, 331,
    337, 343, 347, 349, 359, 361, 367, 373, 379, 397, 419, 421, 431, 439,
    443, 457, 461, 463, 491, 499, 521, 523, 529, 541, 547, 571, 601, 607,
    613, 619, 625, 631, 661, 691, 709, 729, 739, 751, 757, 811, 821,
    823, 841, 859, 877, 919, 961, 967, 991, 997, 1021, 1033, 1051, 1069,
    1087, 1123, 1129, 1171, 1201, 1231, 1291, 1303, 1321, 1327, 1369,
    1381, 1429, 1451, 1453, 1471, 1531, 1597, 1621, 1681, 1741, 1831,
    1849, 1871, 1873, 2011, 2209, 2221, 2311, 2347, 2401, 2473, 2531,
    2551, 2557, 2671, 2731, 2851, 2857, 2971, 3481, 3571, 3691, 3721,
    4111, 4561, 4951, 5821, 6091, 9811,
]

CUBIC_82 = [
    103, 107, 109, 113, 121, 125, 127, 131, 137, 139, 149, 151, 157, 163,
    169, 181, 191, 193, 199, 211, 229, 239, 241, 256, 263, 271, 277, 281,
    283, 289, 307, 311, 331, 337, 343, 349, 361, 367, 373, 379, 397, 421,
    431, 457, 463, 499, 529, 541, 547, 571, 601, 625, 631, 661, 691, 751,
    811, 823, 841, 877, 919, 961, 967, 991, 1171, 1231, 1303, 1321, 1327,
    1369, 1381, 1597, 1831, 1849, 2011, 2311, 2671, 2731, 3571, 3721,
    4111, 4951,
]

# 198 prime powers <= 9620 that are excluded from E_4.
E4_EXCLUDED = [
    2048, 2187, 3491, 3701, 3721, 3803, 3833, 3889, 3967, 4021, 4057, 4079,
    4099, 4177, 4253, 4349, 4457, 4561, 4567, 4639, 4651, 4703, 4721, 4723,
    4799, 4801, 4933, 5009, 5021, 5041, 5051, 5077, 5119, 5233, 5297, 5399,
    5437, 5441, 5443, 5449, 5471, 5483, 5527, 5639, 5651, 5717, 5791, 5879,
    5987, 6011, 6047, 6101, 6113, 6121, 6143, 6197, 6199, 6211, 6317, 6361,
    6367, 6373, 6389, 6529, 6547, 6561, 6563, 6619, 6653, 6659, 6673, 6701,
    6737, 6781, 6793, 6823, 6829, 6857, 6871, 6883, 6899, 6907, 6911, 6949,
    6961, 7027, 7057, 7109, 7121, 7159, 7211, 7213, 7219, 7247, 7351, 7417,
    7451, 7499, 7507, 7529, 7537, 7541, 7559, 7573, 7577, 7607, 7681, 7691,
    7703, 7723, 7757, 7759, 7793, 7817, 7823, 7829, 7901, 7907, 7927, 7933,
    7949, 7993, 8053, 8069, 8081, 8087, 8089, 8101, 8111, 8123, 8167, 8192,
    8209, 8221, 8231, 8263, 8269, 8287, 8291, 8311, 8353, 8369, 8389, 8423,
    8431, 8447, 8461, 8521, 8543, 8563, 8573, 8599, 8629, 8641, 8677, 8699,
    8713, 8719, 8747, 8753, 8761, 8803, 8831, 8837, 8893, 8941, 8951, 8963,
    9001, 9013, 9041, 9049, 9067, 9091, 9103, 9109, 9137, 9151, 9161, 9187,
    9209, 9241, 9277, 9293, 9319, 9341, 9343, 9377, 9391, 9403, 9409, 9419,
    9467, 9473, 9497, 9539, 9551, 9601,
]

# 474 additional potential exceptions above 9620.
E4_ADDED = [
    9661, 9677, 9689, 9749, 9767, 9781, 9787, 9803, 9811, 9829, 9833, 9857,
    9859, 9871, 9901, 9907, 9941, 9967, 10009, 10037, 10061, 10067, 10093,
    10141, 10163, 10169, 10177, 10193, 10223, 10247, 10259, 10267, 10301,
    10303, 10331, 10427, 10429, 10457, 10459, 10477, 10487, 10499, 10501,
    10597, 10613, 10627, 10639, 10709, 10711, 10723, 10739, 10781, 10789,
    10837, 10847, 10859, 10867, 10889, 10949, 10973, 10979, 11003, 11059,
    11071, 11087, 11117, 11119, 11131, 11159, 11173, 11177, 11213, 11243,
    11257, 11287, 11311, 11351, 11353, 11369, 11383, 11411, 11423, 11437,
    11467, 11471, 11527, 11549, 11551, 11579, 11593, 11617, 11621, 11717,
    11731, 11743, 11777, 11779, 11783, 11789, 11831, 11867, 11881, 11887,
    11903, 11927, 11933, 11969, 11971, 11981, 12007, 12011, 12143, 12167,
    12211, 12227, 12241, 12253, 12277, 12323, 12329, 12377, 12391, 12401,
    12409, 12433, 12473, 12503, 12511, 12517, 12583, 12611, 12613, 12637,
    12641, 12671, 12689, 12697, 12713, 12739, 12743, 12781, 12823, 12893,
    12907, 12919, 12923, 12953, 12959, 12979, 13001, 13033, 13049, 13099,
    13103, 13109, 13159, 13187, 13259, 13267, 13313, 13331, 13339, 13397,
    13399, 13417, 13441, 13451, 13463, 13469, 13553, 13567, 13597, 13613,
    13697, 13723, 13757, 13763, 13831, 13859, 13883, 13903, 13931, 14029,
    14057, 14071, 14153, 14197, 14251, 14281, 14321, 14323, 14327, 14431,
    14449, 14461, 14519, 14533, 14629, 14633, 14669, 14741, 14783, 14827,
    14851, 14867, 14897, 14923, 14939, 14947, 14951, 15053, 15107, 15131,
    15137, 15287, 15289, 15313, 15329, 15391, 15401, 15443, 15497, 15511,
    15527, 15541, 15569, 15581, 15619, 15641, 15731, 15809, 15817, 15907,
    15959, 16073, 16103, 16141, 16183, 16253, 16301, 16339, 16421, 16453,
    16477, 16567, 16619, 16633, 16661, 16759, 16763, 16787, 16829, 16843,
    16883, 16927, 17029, 17093, 17137, 17191, 17203, 17207, 17291, 17341,
    17359, 17387, 17389, 17401, 17467, 17573, 17579, 17597, 17681, 17837,
    17863, 17909, 17939, 18041, 18061, 18089, 18127, 18143, 18257, 18311,
    18353, 18427, 18481, 18493, 18517, 18679, 18773, 18787, 18803, 18869,
    18899, 19139, 19141, 19163, 19181, 19183, 19319, 19381, 19391, 19417,
    19447, 19469, 19531, 19571, 19597, 19609, 19739, 19753, 19843, 19937,
    19963, 19993, 20021, 20047, 20129, 20201, 20327, 20399, 20483, 20549,
    20593, 20707, 20747, 20749, 20899, 21013, 21169, 21319, 21407, 21419,
    21433, 21517, 21559, 21713, 21727, 21757, 21803, 21841, 21943, 22079,
    22133, 22147, 22303, 22469, 22511, 22541, 22877, 23057, 23087, 23143,
    23269, 23297, 23311, 23321, 23473, 23549, 23561, 23563, 23827, 23869,
    23971, 23981, 24023, 24179, 24389, 24509, 24611, 24683, 24851, 24907,
    25037, 25117, 25423, 25453, 25537, 25577, 25943, 25997, 26083, 26417,
    26489, 26573, 26597, 26839, 26893, 27061, 27763, 28183, 28309, 28573,
    28643, 28657, 29147, 29173, 29303, 29347, 29567, 29611, 29717, 30103,
    30211, 30269, 30493, 30689, 30757, 31123, 31151, 31247, 31667, 32117,
    32297, 32369, 32381, 32423, 32537, 32843, 32869, 33797, 34033, 34429,
    34693, 35531, 35771, 36037, 36583, 36653, 36821, 36847, 37253, 37549,
    37591, 38011, 38039, 38303, 38501, 38611, 38917, 39733, 39929, 40039,
    40699, 41117, 41777, 41887, 42223, 42589, 43889, 44507, 46619, 46663,
    48313, 49477, 50051, 50653, 52571, 53087, 53129, 53591, 53923, 54319,
    55021, 56393, 57793, 58787, 59093, 59753, 60397, 63601, 66347, 73039,
    102829,
]

G_L = [2, 3, 4, 5, 7, 8, 9, 11, 13, 17, 19, 23, 25, 27, 29, 31, 37, 41,
       43, 47, 73]
G_T = [3, 5, 7, 11, 13, 17, 19, 23, 25, 29, 31, 41, 43]


def prime_powers(lo, hi):
    sieve = bytearray([1]) * (hi + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(hi ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    out = []
    for p in range(2, hi + 1):
        if sieve[p]:
            v = p
            while v <= hi:
                if v >= lo:
                    out.append(v)
                v *= p
    return sorted(out)


def write(name, values):
    values = sorted(values)
    path = DATA / name
    path.write_text("".join(f"{v}\n" for v in values))
    h = hashlib.sha256(path.read_bytes()).hexdigest()
    print(f"{name}: {len(values)} entries, max {values[-1]}, sha256 {h}")
    return h


assert len(CUBIC_146) == 146, len(CUBIC_146)
assert len(CUBIC_82) == 82, len(CUBIC_82)
assert len(E4_EXCLUDED) == 198, len(E4_EXCLUDED)
assert len(E4_ADDED) == 474, len(E4_ADDED)
assert set(CUBIC_82) < set(CUBIC_146)

pp = prime_powers(2, 9620)
assert len(pp) == 1238, len(pp)
assert set(E4_EXCLUDED) < set(pp)

e4 = sorted((set(pp) - set(E4_EXCLUDED)) | set(E4_ADDED))
assert len(e4) == 1514, len(e4)
assert max(e4) == 102829
assert len([x for x in e4 if x > 200]) - 6 == 1448
assert len([x for x in e4 if x > 23000]) == 124

write("cubic_possible_146.txt", CUBIC_146)
write("cubic_possible_82.txt", CUBIC_82)
write("quartic_e4.txt", e4)
write("quartic_gl.txt", G_L)
write("quartic_gt.txt", G_T)
print("all fixture checks passed")
