def remove_extras(lst):
    return list(set(lst))
