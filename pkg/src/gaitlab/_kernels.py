"""Hot numeric kernels shared by the gait, feedback, and plant modules.

Everything here operates on plain floats and flat float64 arrays so the
functions compile under numba; the public modules wrap them with dataclass
interfaces.  With ``GAITLAB_NO_NUMBA=1`` the same code runs under CPython
and produces bit-identical results.

Flat abstract-pose layout (18 floats):
    [0:6]   left leg   (lx, ly, lz, fx, fy, eta)
    [6:12]  right leg  (lx, ly, lz, fx, fy, eta)
    [12:15] left arm   (lx, ly, eta)
    [15:18] right arm  (lx, ly, eta)

Parameter vectors:
    cpg_arr   (24,)  halt pose[0:18], lift_amp, swing_amp, sway_amp,
                     arm_swing_amp, double_support_fraction, frequency
    gains_arr (12,)  armX kp, kd | armY kp, kd | suppX kp, kd |
                     contX ki | comX ki | comY ki |
                     speed_up, slow_down, min_timing_factor
    filt_arr  (3,)   smoothing tau, deadband, leak rate
    plant_arr (5,)   pitch natural freq, roll natural freq, damping,
                     gait coupling, fall threshold
    eff       (2,6)  per-plane acceleration per unit activation,
                     columns (armX, armY, suppX, contX, comX, comY)
    geom_arr  (3,)   thigh length, shank length, halt eta
"""

import math

import numpy as np

from ._accel import maybe_njit

POSE_SIZE = 18
ACT_SIZE = 7  # armX, armY, suppX, contX, comX, comY, timing_factor
FILTER_STATE_SIZE = 6  # smoothed, d-estimate, integral -- pitch then roll plane


@maybe_njit(cache=True)
def wrap_pi(a):
    x = (a + math.pi) % (2.0 * math.pi)  # in [0, 2*pi); 0 only for a = pi + 2*pi*k
    if x == 0.0:
        x = 2.0 * math.pi
    return x - math.pi


@maybe_njit(cache=True)
def foot_ik_core(x, y, z, thigh, shank):
    """Two-link leg IK: hip pitch, hip roll, knee pitch for an ankle target.

    The cosine argument is clamped, so callers must reject unreachable
    targets beforehand if they need an error instead of a boundary pose.
    """
    hip_roll = math.atan2(y, -z)
    rho = math.sqrt(y * y + z * z)
    d2 = x * x + rho * rho
    c = (d2 - thigh * thigh - shank * shank) / (2.0 * thigh * shank)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    knee = math.acos(c)
    gamma = math.atan2(x, rho)
    hip_pitch = gamma - math.atan2(shank * math.sin(knee), thigh + shank * math.cos(knee))
    return hip_pitch, hip_roll, knee


@maybe_njit(cache=True)
def foot_fk_core(hip_pitch, hip_roll, knee, thigh, shank):
    """Forward kinematics matching foot_ik_core's chain."""
    x = thigh * math.sin(hip_pitch) + shank * math.sin(hip_pitch + knee)
    z0 = -(thigh * math.cos(hip_pitch) + shank * math.cos(hip_pitch + knee))
    y = -z0 * math.sin(hip_roll)
    z = z0 * math.cos(hip_roll)
    return x, y, z


@maybe_njit(cache=True)
def cpg_pose(mu, vx, vy, wz, cpg_arr, out):
    """Evaluate the open-loop gait pose at phase mu into ``out`` (18,)."""
    lift = cpg_arr[18]
    swing = cpg_arr[19]
    sway = cpg_arr[20]
    arm_swing = cpg_arr[21]
    dsf = cpg_arr[22]

    swing_len = math.pi * (1.0 - 2.0 * dsf)
    swing_start = 0.5 * math.pi - 0.5 * swing_len
    sway_term = -sway * math.sin(mu)

    for side in range(2):
        mul = wrap_pi(mu) if side == 0 else wrap_pi(mu + math.pi)
        base = 6 * side
        u = (mul - swing_start) / swing_len
        pulse = math.sin(math.pi * u) if (u > 0.0 and u < 1.0) else 0.0
        out[base + 0] = cpg_arr[base + 0] + swing * vy + sway_term
        out[base + 1] = cpg_arr[base + 1] - swing * vx * math.cos(mul)
        out[base + 2] = cpg_arr[base + 2] + swing * wz * math.sin(mul)
        out[base + 3] = cpg_arr[base + 3]
        out[base + 4] = cpg_arr[base + 4]
        out[base + 5] = cpg_arr[base + 5] + lift * pulse

        abase = 12 + 3 * side
        out[abase + 0] = cpg_arr[abase + 0]
        out[abase + 1] = cpg_arr[abase + 1] + arm_swing * vx * math.cos(mul)
        out[abase + 2] = cpg_arr[abase + 2]


@maybe_njit(cache=True)
def filters_step(fs, d_theta, d_phi, dt, filt_arr):
    """Advance both deviation filters in place; returns P, D, I per plane.

    Smoothing is a first-order low-pass, the derivative is the additionally
    smoothed finite difference of the smoothed signal, and the integral is
    the exact one-step solution of di/dt = -leak*i + P, which keeps
    |I| <= sup|P|/leak for all time.
    """
    tau = filt_arr[0]
    deadband = filt_arr[1]
    leak = filt_arr[2]
    alpha = 1.0 - math.exp(-dt / tau)
    decay = math.exp(-leak * dt)
    gain_i = (1.0 - decay) / leak

    out = np.empty(6)
    for plane in range(2):
        d = d_theta if plane == 0 else d_phi
        j = 3 * plane
        y_old = fs[j]
        y = y_old + (d - y_old) * alpha
        raw_d = (y - y_old) / dt
        dv = fs[j + 1] + (raw_d - fs[j + 1]) * alpha
        if y > deadband:
            p = y - deadband
        elif y < -deadband:
            p = y + deadband
        else:
            p = 0.0
        i_new = fs[j + 2] * decay + p * gain_i
        fs[j] = y
        fs[j + 1] = dv
        fs[j + 2] = i_new
        out[3 * plane + 0] = p
        out[3 * plane + 1] = dv
        out[3 * plane + 2] = i_new
    return out


@maybe_njit(cache=True)
def activations_from(pdi, gains_arr, support_sign, out):
    """Corrective-action activations from (P, D, I) per plane into ``out`` (7,)."""
    p_t = pdi[0]
    d_t = pdi[1]
    i_t = pdi[2]
    p_p = pdi[3]
    d_p = pdi[4]
    i_p = pdi[5]

    out[0] = gains_arr[0] * p_p + gains_arr[1] * d_p  # arm angle X
    out[1] = gains_arr[2] * p_t + gains_arr[3] * d_t  # arm angle Y
    out[2] = gains_arr[4] * p_p + gains_arr[5] * d_p  # support foot angle X
    out[3] = gains_arr[6] * i_p  # continuous foot angle X
    out[4] = gains_arr[7] * i_t  # CoM shift X
    out[5] = gains_arr[8] * i_p  # CoM shift Y

    # tilting toward the support leg is outward, away from it inward
    tilt = p_p * support_sign
    outward = tilt if tilt > 0.0 else 0.0
    inward = -tilt if tilt < 0.0 else 0.0
    tf = 1.0 + gains_arr[9] * inward - gains_arr[10] * outward
    if tf < gains_arr[11]:
        tf = gains_arr[11]
    out[6] = tf


@maybe_njit(cache=True)
def apply_actions_flat(pose, act, support_sign, geom_arr):
    """Superimpose activations onto an abstract pose in place.

    Returns 1 if any retraction had to be clamped into [0, 1], else 0.
    """
    arm_x = act[0]
    arm_y = act[1]
    supp_x = act[2]
    cont_x = act[3]
    com_x = act[4]
    com_y = act[5]

    pose[12] += arm_x
    pose[15] += arm_x
    pose[13] += arm_y
    pose[16] += arm_y
    pose[3] += cont_x
    pose[9] += cont_x
    if support_sign > 0.0:
        pose[3] += supp_x
    else:
        pose[9] += supp_x

    if com_x != 0.0 or com_y != 0.0:
        thigh = geom_arr[0]
        shank = geom_arr[1]
        halt_eta = geom_arr[2]
        knee0 = 2.0 * math.acos(1.0 - halt_eta)
        dist = math.sqrt(
            thigh * thigh + shank * shank + 2.0 * thigh * shank * math.cos(knee0)
        )
        qh0, qr0, qk0 = foot_ik_core(0.0, 0.0, -dist, thigh, shank)
        qh1, qr1, qk1 = foot_ik_core(-com_x, -com_y, -dist, thigh, shank)
        d_ly = (qh1 + 0.5 * qk1) - (qh0 + 0.5 * qk0)
        d_lx = qr1 - qr0
        d_eta = math.cos(0.5 * qk0) - math.cos(0.5 * qk1)
        pose[0] += d_lx
        pose[6] += d_lx
        pose[1] += d_ly
        pose[7] += d_ly
        pose[5] += d_eta
        pose[11] += d_eta

    saturated = 0
    for idx in (5, 11, 14, 17):
        if pose[idx] < 0.0:
            pose[idx] = 0.0
            saturated = 1
        elif pose[idx] > 1.0:
            pose[idx] = 1.0
            saturated = 1
    return saturated


@maybe_njit(cache=True)
def plant_accels(pitch, roll, pitch_rate, roll_rate, exc_p, exc_r, act, plant_arr, eff):
    """Per-plane angular accelerations of the surrogate torso."""
    wn_p = plant_arr[0]
    wn_r = plant_arr[1]
    damping = plant_arr[2]
    acc_p = -wn_p * wn_p * math.sin(pitch) - damping * pitch_rate + exc_p
    acc_r = -wn_r * wn_r * math.sin(roll) - damping * roll_rate + exc_r
    for k in range(6):
        acc_p += eff[0, k] * act[k]
        acc_r += eff[1, k] * act[k]
    return acc_p, acc_r


@maybe_njit(cache=True)
def gait_excitation(mu, vx, vy, wz, coupling):
    """Phase-locked excitation the stepping gait applies to the torso."""
    exc_p = coupling * (0.5 + abs(vx)) * (0.3 * math.sin(mu) + 0.7 * math.sin(2.0 * mu))
    exc_r = coupling * (0.5 + 0.5 * abs(vy) + 0.3 * abs(wz)) * math.sin(mu)
    return exc_p, exc_r


@maybe_njit(cache=True)
def run_closed_loop(
    cmds,
    noise,
    dist_steps,
    dist_kicks,
    cpg_arr,
    gains_arr,
    filt_arr,
    plant_arr,
    eff,
    geom_arr,
    dt,
    mu0,
    state0,
):
    """Run the full closed loop: CPG -> filters -> activations -> plant.

    Returns (mu, state, dev, ep, act, pose, fall_idx, saturations) where the
    time-series arrays have one row per executed step; ``fall_idx`` is the
    index of the last recorded sample if the torso fell, else -1.  Sample i
    holds the state at t = i*dt and the control computed from it.
    """
    n = cmds.shape[0]
    mu_out = np.empty(n)
    state_out = np.empty((n, 4))
    dev_out = np.empty((n, 2))
    ep_out = np.empty((n, 2))
    act_out = np.empty((n, ACT_SIZE))
    pose_out = np.empty((n, POSE_SIZE))

    fs = np.zeros(FILTER_STATE_SIZE)
    pose = np.empty(POSE_SIZE)
    act = np.empty(ACT_SIZE)

    freq = cpg_arr[23]
    coupling = plant_arr[3]
    fall_threshold = plant_arr[4]

    mu = mu0
    pitch = state0[0]
    roll = state0[1]
    pitch_rate = state0[2]
    roll_rate = state0[3]

    fall_idx = -1
    saturations = 0

    for i in range(n):
        vx = cmds[i, 0]
        vy = cmds[i, 1]
        wz = cmds[i, 2]
        support_sign = -1.0 if mu > 0.0 else 1.0

        mu_out[i] = mu
        state_out[i, 0] = pitch
        state_out[i, 1] = roll
        state_out[i, 2] = pitch_rate
        state_out[i, 3] = roll_rate

        d_theta = pitch
        d_phi = roll
        dev_out[i, 0] = d_theta
        dev_out[i, 1] = d_phi

        pdi = filters_step(fs, d_theta, d_phi, dt, filt_arr)
        ep_out[i, 0] = pdi[0]
        ep_out[i, 1] = pdi[3]

        activations_from(pdi, gains_arr, support_sign, act)
        for k in range(ACT_SIZE):
            act_out[i, k] = act[k]

        cpg_pose(mu, vx, vy, wz, cpg_arr, pose)
        saturations += apply_actions_flat(pose, act, support_sign, geom_arr)
        for k in range(POSE_SIZE):
            pose_out[i, k] = pose[k]

        for j in range(dist_steps.shape[0]):
            if dist_steps[j] == i:
                pitch_rate += dist_kicks[j, 0]
                roll_rate += dist_kicks[j, 1]

        exc_p, exc_r = gait_excitation(mu, vx, vy, wz, coupling)
        acc_p, acc_r = plant_accels(
            pitch, roll, pitch_rate, roll_rate, exc_p, exc_r, act, plant_arr, eff
        )
        acc_p += noise[i, 0]
        acc_r += noise[i, 1]

        pitch_rate += dt * acc_p
        pitch += dt * pitch_rate
        roll_rate += dt * acc_r
        roll += dt * roll_rate

        if abs(pitch) > fall_threshold or abs(roll) > fall_threshold:
            fall_idx = i
            break

        mu = wrap_pi(mu + 2.0 * math.pi * freq * act[6] * dt)

    return mu_out, state_out, dev_out, ep_out, act_out, pose_out, fall_idx, saturations
