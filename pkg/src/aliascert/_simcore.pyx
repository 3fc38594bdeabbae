# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpreter core: a bit-for-bit twin of ``_simpure``.

Hot state (registers, tags, the splitmix-based tag mix) lives in C;
sparse memory stays a Python dict keyed by packed (tag, address) ints.
The parity test asserts outcome equality against the pure core.
"""

from .simdefs import Fault, RunOutcome

cdef unsigned long long M64 = 0xFFFFFFFFFFFFFFFFULL
cdef unsigned long long M32 = 0xFFFFFFFFULL

cdef unsigned int T_LI = 0x11
cdef unsigned int T_ADDIU = 0x22
cdef unsigned int T_ADDU = 0x33
cdef unsigned int T_NAND = 0x44
cdef unsigned int T_JAL = 0x55
cdef unsigned int T_EA = 0x66
cdef unsigned int T_INIT = 0x77

cdef unsigned int OP_SW = 0, OP_LW = 1, OP_SB = 2, OP_LB = 3
cdef unsigned int OP_MOVE = 4, OP_LI = 5, OP_ADDIU = 6, OP_ADDU = 7, OP_NAND = 8
cdef unsigned int OP_BEQ = 9, OP_BNEZ = 10, OP_J = 11, OP_JAL = 12, OP_JR = 13

cdef unsigned long long RETURN_SENTINEL = 0xFFFFFFFCULL

cdef int RA = 31
cdef int SP = 29


cdef inline unsigned long long sm64(unsigned long long z) nogil:
    z = z + 0x9E3779B97F4A7C15ULL
    z ^= z >> 30
    z = z * 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z = z * 0x94D049BB133111EBULL
    z ^= z >> 31
    return z


cdef inline unsigned int tag2(unsigned long long seed, unsigned int domain,
                              unsigned long long v1, unsigned long long v2) nogil:
    cdef unsigned long long h = sm64(seed ^ <unsigned long long>domain)
    h = sm64(h ^ v1)
    h = sm64(h ^ v2)
    return <unsigned int>(h & M32)


cdef inline unsigned int tag1(unsigned long long seed, unsigned int domain,
                              unsigned long long v1) nogil:
    cdef unsigned long long h = sm64(seed ^ <unsigned long long>domain)
    h = sm64(h ^ v1)
    return <unsigned int>(h & M32)


cdef inline unsigned long long pack(unsigned int hi, unsigned int lo) nogil:
    return (<unsigned long long>hi << 32) | <unsigned long long>lo


cdef inline unsigned long long u64_imm(long long imm) nogil:
    return <unsigned long long>imm


def run_clean_image(image, fuel):
    cdef unsigned int regs[32]
    cdef int i
    for i in range(32):
        regs[i] = 0
    regs[SP] = <unsigned int>image.stack_base
    regs[RA] = <unsigned int>RETURN_SENTINEL

    mem = {}
    cdef unsigned int a32
    for addr, data, _step, _size, _init in image.blobs:
        for k in range(len(data)):
            a32 = <unsigned int>(addr + k)
            w = a32 & ~3
            mem[w] = mem.get(w, 0) | (data[k] << (8 * (a32 & 3)))

    code = image.code
    dev = image.device
    cdef unsigned long long dev_base = dev.base
    cdef unsigned long long dev_end = dev.base + dev.size
    cdef long long print_off = dev.print_offset
    cdef long long halt_off = dev.halt_offset
    cdef unsigned long long base = image.base
    cdef unsigned long long end = image.code_end
    cdef unsigned long long pc = image.entry_addr
    cdef unsigned long long maxsteps = fuel
    cdef unsigned long long steps = 0
    cdef unsigned int op, ea, w2, lane, cur
    cdef long long a, b, c
    cdef bint halted = False
    out = bytearray()
    exit_reason = None
    error = None
    error_pc = None

    while True:
        if pc == RETURN_SENTINEL:
            halted = True
            exit_reason = "returned"
            break
        if steps >= maxsteps:
            error, error_pc = "FuelExhausted", pc
            break
        if pc < base or pc >= end or pc & 3:
            error, error_pc = "BadProgramCounter", pc
            break
        op, a, b, c = code[(pc - base) >> 2]
        steps += 1

        if op == OP_SW or op == OP_SB:
            ea = <unsigned int>(regs[c] + b)
            if dev_base <= ea < dev_end:
                if ea - dev_base == print_off:
                    out.append(regs[a] & 0xFF)
                elif ea - dev_base == halt_off:
                    halted = True
                    exit_reason = "halt-device"
                    break
                pc += 4
                continue
            if op == OP_SW:
                if ea & 3:
                    error, error_pc = "UnalignedWordAccess", pc
                    break
                mem[ea] = regs[a]
            else:
                w2, lane = ea & ~3, ea & 3
                cur = mem.get(w2, 0)
                mem[w2] = (cur & ~(0xFF << (8 * lane))) | ((regs[a] & 0xFF) << (8 * lane))
            pc += 4
            continue
        if op == OP_LW or op == OP_LB:
            ea = <unsigned int>(regs[c] + b)
            if dev_base <= ea < dev_end:
                error, error_pc = "DeviceReadUnsupported", pc
                break
            if op == OP_LW:
                if ea & 3:
                    error, error_pc = "UnalignedWordAccess", pc
                    break
                v = mem.get(ea)
                if v is None:
                    error, error_pc = "UninitializedRead", pc
                    break
            else:
                v = mem.get(ea & ~3)
                if v is None:
                    error, error_pc = "UninitializedRead", pc
                    break
                v = (v >> (8 * (ea & 3))) & 0xFF
            if a != 0:
                regs[a] = <unsigned int>v
            pc += 4
            continue
        if op == OP_MOVE:
            if a != 0:
                regs[a] = regs[b]
        elif op == OP_LI:
            if a != 0:
                regs[a] = <unsigned int>b
        elif op == OP_ADDIU:
            if a != 0:
                regs[a] = <unsigned int>(regs[b] + c)
        elif op == OP_ADDU:
            if a != 0:
                regs[a] = <unsigned int>(regs[b] + regs[c])
        elif op == OP_NAND:
            if a != 0:
                regs[a] = <unsigned int>(~(regs[b] & regs[c]))
        elif op == OP_BEQ:
            pc = <unsigned long long>c if regs[a] == regs[b] else pc + 4
            continue
        elif op == OP_BNEZ:
            pc = <unsigned long long>b if regs[a] != 0 else pc + 4
            continue
        elif op == OP_J:
            pc = <unsigned long long>a
            continue
        elif op == OP_JAL:
            regs[RA] = <unsigned int>(pc + 4)
            pc = <unsigned long long>a
            continue
        elif op == OP_JR:
            pc = regs[a]
            continue
        pc += 4

    return RunOutcome(regs=[regs[i] for i in range(32)], output=bytes(out),
                      halted=halted, steps=steps, error=error,
                      error_pc=None if error_pc is None else int(error_pc),
                      exit_reason=exit_reason)


cdef inline object _alias_put_byte(dict mem, dict locount,
                                   unsigned int t, unsigned int a, unsigned int byte):
    cdef unsigned int w = a & ~3
    cdef unsigned int lane = a & 3
    key = pack(t, w)
    cell = mem.get(key)
    if cell is None:
        locount[w] = locount.get(w, 0) + 1
        cur = 0
    else:
        cur = cell[1]
    mem[key] = (0, (cur & ~(0xFF << (8 * lane))) | (byte << (8 * lane)))
    return None


def run_alias_image(image, fuel, seed):
    cdef unsigned long long s = <unsigned long long>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef unsigned int hi[32]
    cdef unsigned int lo[32]
    cdef int i
    for i in range(32):
        hi[i] = 0
        lo[i] = 0
    for i in range(1, 32):
        hi[i] = tag1(s, T_INIT, <unsigned long long>i)
    lo[SP] = <unsigned int>image.stack_base
    lo[RA] = <unsigned int>RETURN_SENTINEL

    mem = {}
    locount = {}

    # preload initialized blobs along their canonical access chains
    cdef unsigned int base_hi, p_hi, eh
    cdef unsigned int p_lo, A
    cdef int k, j, off, span, step
    for addr, data, stp, _size, init in image.blobs:
        if not init:
            continue
        A = <unsigned int>addr
        step = stp
        base_hi = tag1(s, T_LI, <unsigned long long>A)
        for k in range(len(data)):
            eh = tag2(s, T_EA, pack(base_hi, A), u64_imm(k))
            if ((A + k) & 3) == 0 and k + 4 <= len(data):
                key = pack(eh, A + k)
                if key not in mem:
                    locount[A + k] = locount.get(A + k, 0) + 1
                mem[key] = (0, int.from_bytes(data[k:k + 4], "little"))
            _alias_put_byte(mem, locount, eh, A + k, data[k])
        p_hi, p_lo, off = base_hi, A, 0
        while off < len(data):
            span = step if step <= len(data) - off else len(data) - off
            for j in range(span):
                eh = tag2(s, T_EA, pack(p_hi, p_lo), u64_imm(j))
                if ((p_lo + j) & 3) == 0 and j + 4 <= span:
                    key = pack(eh, p_lo + j)
                    if key not in mem:
                        locount[p_lo + j] = locount.get(p_lo + j, 0) + 1
                    mem[key] = (0, int.from_bytes(data[off + j:off + j + 4], "little"))
                _alias_put_byte(mem, locount, eh, p_lo + j, data[off + j])
            p_hi = tag2(s, T_ADDIU, pack(p_hi, p_lo), u64_imm(step))
            p_lo = <unsigned int>(p_lo + step)
            off += step

    code = image.code
    dev = image.device
    cdef unsigned long long dev_base = dev.base
    cdef unsigned long long dev_end = dev.base + dev.size
    cdef long long print_off = dev.print_offset
    cdef long long halt_off = dev.halt_offset
    cdef unsigned long long cbase = image.base
    cdef unsigned long long cend = image.code_end
    cdef unsigned long long pc = image.entry_addr
    cdef unsigned long long maxsteps = fuel
    cdef unsigned long long steps = 0
    cdef unsigned int op, ea_lo, ea_hi, w2, lane
    cdef long long a, b, c
    cdef bint halted = False
    out = bytearray()
    faults = []
    exit_reason = None
    error = None
    error_pc = None

    while True:
        if pc == RETURN_SENTINEL:
            halted = True
            exit_reason = "returned"
            break
        if steps >= maxsteps:
            error, error_pc = "FuelExhausted", pc
            break
        if pc < cbase or pc >= cend or pc & 3:
            error, error_pc = "BadProgramCounter", pc
            break
        op, a, b, c = code[(pc - cbase) >> 2]
        steps += 1

        if op == OP_SW or op == OP_SB:
            ea_lo = <unsigned int>(lo[c] + b)
            if dev_base <= ea_lo < dev_end:
                if ea_lo - dev_base == print_off:
                    out.append(lo[a] & 0xFF)
                elif ea_lo - dev_base == halt_off:
                    halted = True
                    exit_reason = "halt-device"
                    break
                pc += 4
                continue
            ea_hi = tag2(s, T_EA, pack(hi[c], lo[c]), u64_imm(b))
            if op == OP_SW:
                if ea_lo & 3:
                    error, error_pc = "UnalignedWordAccess", pc
                    break
                key = pack(ea_hi, ea_lo)
                if key not in mem:
                    locount[ea_lo] = locount.get(ea_lo, 0) + 1
                mem[key] = (int(hi[a]), int(lo[a]))
            else:
                _alias_put_byte(mem, locount, ea_hi, ea_lo, lo[a] & 0xFF)
            pc += 4
            continue
        if op == OP_LW or op == OP_LB:
            ea_lo = <unsigned int>(lo[c] + b)
            if dev_base <= ea_lo < dev_end:
                error, error_pc = "DeviceReadUnsupported", pc
                break
            ea_hi = tag2(s, T_EA, pack(hi[c], lo[c]), u64_imm(b))
            w2 = ea_lo & ~3
            if op == OP_LW:
                if ea_lo & 3:
                    error, error_pc = "UnalignedWordAccess", pc
                    break
                cell = mem.get(pack(ea_hi, ea_lo))
            else:
                cell = mem.get(pack(ea_hi, w2))
            if cell is None:
                if locount.get(w2, 0) > 0:
                    faults.append(Fault("AliasFault", int(pc), int(ea_lo)))
                    error, error_pc = "AliasFault", pc
                else:
                    error, error_pc = "UninitializedRead", pc
                break
            if op == OP_LW:
                vhi, vlo = cell
            else:
                vhi, vlo = 0, (cell[1] >> (8 * (ea_lo & 3))) & 0xFF
            if a != 0:
                hi[a] = <unsigned int>vhi
                lo[a] = <unsigned int>vlo
            pc += 4
            continue
        if op == OP_MOVE:
            if a != 0:
                hi[a] = hi[b]
                lo[a] = lo[b]
        elif op == OP_LI:
            if a != 0:
                hi[a] = tag1(s, T_LI, <unsigned long long>(b & <long long>M32))
                lo[a] = <unsigned int>b
        elif op == OP_ADDIU:
            if a != 0:
                hi[a] = tag2(s, T_ADDIU, pack(hi[b], lo[b]), u64_imm(c))
                lo[a] = <unsigned int>(lo[b] + c)
        elif op == OP_ADDU:
            if a != 0:
                hi[a] = tag2(s, T_ADDU, pack(hi[b], lo[b]), pack(hi[c], lo[c]))
                lo[a] = <unsigned int>(lo[b] + lo[c])
        elif op == OP_NAND:
            if a != 0:
                hi[a] = tag2(s, T_NAND, pack(hi[b], lo[b]), pack(hi[c], lo[c]))
                lo[a] = <unsigned int>(~(lo[b] & lo[c]))
        elif op == OP_BEQ:
            pc = <unsigned long long>c if lo[a] == lo[b] else pc + 4
            continue
        elif op == OP_BNEZ:
            pc = <unsigned long long>b if lo[a] != 0 else pc + 4
            continue
        elif op == OP_J:
            pc = <unsigned long long>a
            continue
        elif op == OP_JAL:
            hi[RA] = tag1(s, T_JAL, pc + 4)
            lo[RA] = <unsigned int>(pc + 4)
            pc = <unsigned long long>a
            continue
        elif op == OP_JR:
            pc = lo[a]
            continue
        pc += 4

    return RunOutcome(regs=[lo[i] for i in range(32)], output=bytes(out),
                      halted=halted, steps=steps, faults=faults, error=error,
                      error_pc=None if error_pc is None else int(error_pc),
                      exit_reason=exit_reason)
