def sum_list(a):
    total = a.get_value()
    while a.has_prev():
        a.go_prev()
        total += a.get_value()
    return total
