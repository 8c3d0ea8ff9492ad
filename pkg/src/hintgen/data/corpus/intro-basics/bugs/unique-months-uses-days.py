def unique_months(dates):
    months = []
    for day, month in dates:
        if day not in months:
            months.append(day)
    months.sort()
    return months
