def remove_extras(lst):
    result = []
    for x in lst:
        if x in result:
            result.append(x)
    return result
