# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transition kernel. Logic mirrors _engine_py line for line; the
differential test suite asserts exact agreement between the two."""

from libc.stdint cimport int8_t, int16_t

cdef int FLOOR = 0
cdef int COUNTER = 1
cdef int ONION_DISPENSER = 2
cdef int DISH_DISPENSER = 3
cdef int POT = 4
cdef int SERVING_WINDOW = 5

cdef int NOTHING = 0
cdef int ONION = 1
cdef int DISH = 2
cdef int SOUP = 3

cdef int A_RIGHT = 3
cdef int A_INTERACT = 4

cdef int EV_NONE = -1
cdef int EV_PICKUP_ONION_FROM_DISPENSER = 0
cdef int EV_PICKUP_ONION_FROM_COUNTER = 1
cdef int EV_PICKUP_DISH_FROM_DISPENSER = 2
cdef int EV_PICKUP_DISH_FROM_COUNTER = 3
cdef int EV_PLACE_ONION_IN_POT = 4
cdef int EV_PLACE_ONION_ON_COUNTER = 5
cdef int EV_GET_SOUP_FROM_POT = 6
cdef int EV_PLACE_DISH_ON_COUNTER = 7
cdef int EV_PICKUP_SOUP_FROM_COUNTER = 8
cdef int EV_PLACE_SOUP_ON_COUNTER = 9
cdef int EV_SERVE_SOUP = 10

cdef int[4] _DR = [-1, 1, 0, 0]
cdef int[4] _DC = [0, 0, -1, 1]


cdef inline int _predict(
    const int8_t[:, :] tiles, const int16_t[:, :] pot_index,
    int8_t[:, :] counters, int16_t[:] pot_onions, int16_t[:] pot_timer,
    int r, int c, int orient, int held_obj, int pot_capacity,
    int* out_tr, int* out_tc,
) nogil:
    cdef int tr = r + _DR[orient]
    cdef int tc = c + _DC[orient]
    cdef int h = tiles.shape[0]
    cdef int w = tiles.shape[1]
    cdef int tile, obj, pi
    out_tr[0] = tr
    out_tc[0] = tc
    if tr < 0 or tr >= h or tc < 0 or tc >= w:
        return EV_NONE
    tile = tiles[tr, tc]
    if tile == FLOOR:
        return EV_NONE
    if tile == ONION_DISPENSER:
        if held_obj == NOTHING:
            return EV_PICKUP_ONION_FROM_DISPENSER
    elif tile == DISH_DISPENSER:
        if held_obj == NOTHING:
            return EV_PICKUP_DISH_FROM_DISPENSER
    elif tile == COUNTER:
        obj = counters[tr, tc]
        if held_obj == NOTHING and obj != NOTHING:
            if obj == ONION:
                return EV_PICKUP_ONION_FROM_COUNTER
            if obj == DISH:
                return EV_PICKUP_DISH_FROM_COUNTER
            return EV_PICKUP_SOUP_FROM_COUNTER
        if held_obj != NOTHING and obj == NOTHING:
            if held_obj == ONION:
                return EV_PLACE_ONION_ON_COUNTER
            if held_obj == DISH:
                return EV_PLACE_DISH_ON_COUNTER
            return EV_PLACE_SOUP_ON_COUNTER
    elif tile == POT:
        pi = pot_index[tr, tc]
        if held_obj == ONION and pot_onions[pi] < pot_capacity:
            return EV_PLACE_ONION_IN_POT
        if held_obj == DISH and pot_onions[pi] == pot_capacity and pot_timer[pi] == 0:
            return EV_GET_SOUP_FROM_POT
    elif tile == SERVING_WINDOW:
        if held_obj == SOUP:
            return EV_SERVE_SOUP
    return EV_NONE


def interact_effect(
    const int8_t[:, :] tiles, const int16_t[:, :] pot_index,
    int8_t[:, :] counters, int16_t[:] pot_onions, int16_t[:] pot_timer,
    int r, int c, int orient, int held_obj, int pot_capacity,
):
    cdef int tr = 0, tc = 0
    cdef int ev = _predict(
        tiles, pot_index, counters, pot_onions, pot_timer,
        r, c, orient, held_obj, pot_capacity, &tr, &tc,
    )
    return ev, tr, tc


def step_kernel(
    const int8_t[:, :] tiles, const int16_t[:, :] pot_index,
    int16_t[:, :] positions, int8_t[:] orientations, int8_t[:] held,
    int16_t[:] pot_onions, int16_t[:] pot_timer, int8_t[:, :] counters,
    int a0, int a1, int pot_capacity, int cook_time, int soup_reward,
):
    cdef int h = tiles.shape[0]
    cdef int w = tiles.shape[1]
    cdef int p, a, r, c, nr, nc
    cdef int[2] actions
    cdef int[2] pr
    cdef int[2] pc
    actions[0] = a0
    actions[1] = a1

    for p in range(2):
        r = positions[p, 0]
        c = positions[p, 1]
        a = actions[p]
        pr[p] = r
        pc[p] = c
        if a <= A_RIGHT:
            orientations[p] = <int8_t>a
            nr = r + _DR[a]
            nc = c + _DC[a]
            if 0 <= nr < h and 0 <= nc < w and tiles[nr, nc] == FLOOR:
                pr[p] = nr
                pc[p] = nc

    if pr[0] == pr[1] and pc[0] == pc[1]:
        pass  # shared target: neither moves
    elif (pr[0] == positions[1, 0] and pc[0] == positions[1, 1]
          and pr[1] == positions[0, 0] and pc[1] == positions[0, 1]):
        pass  # swap-through blocked
    else:
        positions[0, 0] = <int16_t>pr[0]
        positions[0, 1] = <int16_t>pc[0]
        positions[1, 0] = <int16_t>pr[1]
        positions[1, 1] = <int16_t>pc[1]

    cdef int reward = 0
    cdef int ev, tr, tc, pi, i
    events = []
    for p in range(2):
        if actions[p] == A_INTERACT:
            tr = 0
            tc = 0
            ev = _predict(
                tiles, pot_index, counters, pot_onions, pot_timer,
                positions[p, 0], positions[p, 1], orientations[p], held[p],
                pot_capacity, &tr, &tc,
            )
            if ev == EV_PICKUP_ONION_FROM_DISPENSER:
                held[p] = ONION
            elif ev == EV_PICKUP_DISH_FROM_DISPENSER:
                held[p] = DISH
            elif (ev == EV_PICKUP_ONION_FROM_COUNTER
                  or ev == EV_PICKUP_DISH_FROM_COUNTER
                  or ev == EV_PICKUP_SOUP_FROM_COUNTER):
                held[p] = counters[tr, tc]
                counters[tr, tc] = NOTHING
            elif (ev == EV_PLACE_ONION_ON_COUNTER
                  or ev == EV_PLACE_DISH_ON_COUNTER
                  or ev == EV_PLACE_SOUP_ON_COUNTER):
                counters[tr, tc] = held[p]
                held[p] = NOTHING
            elif ev == EV_PLACE_ONION_IN_POT:
                pi = pot_index[tr, tc]
                pot_onions[pi] += 1
                if pot_onions[pi] == pot_capacity:
                    pot_timer[pi] = <int16_t>cook_time
                held[p] = NOTHING
            elif ev == EV_GET_SOUP_FROM_POT:
                pi = pot_index[tr, tc]
                pot_onions[pi] = 0
                held[p] = SOUP
            elif ev == EV_SERVE_SOUP:
                held[p] = NOTHING
                reward += soup_reward
            events.append((ev, tr, tc))
        else:
            events.append((EV_NONE, 0, 0))

    for i in range(pot_onions.shape[0]):
        if pot_onions[i] == pot_capacity and pot_timer[i] > 0:
            pot_timer[i] -= 1

    return reward, events
