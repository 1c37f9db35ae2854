"""Dump the body child of a SOAP 1.1 envelope as a JSON tree (no schema)."""
import json
import sys
import xml.etree.ElementTree as ET

SOAP = "{http://schemas.xmlsoap.org/soap/envelope/}"
XSI = "{http://www.w3.org/2001/XMLSchema-instance}"


def local(tag):
    return tag.split("}", 1)[1] if tag.startswith("{") else tag


def tree(el):
    if el.attrib.get(XSI + "nil") in ("true", "1"):
        return None
    attrs = {"@" + local(k): v for k, v in el.attrib.items() if not k.startswith(XSI)}
    kids = list(el)
    if not kids:
        text = el.text or ""
        if not attrs:
            return text
        attrs["#text"] = text
        return attrs
    groups = {}
    for k in kids:
        groups.setdefault(local(k.tag), []).append(tree(k))
    for name, vals in groups.items():
        attrs[name] = vals if len(vals) > 1 else vals[0]
    return attrs


def main(path):
    root = ET.parse(path).getroot()
    body = root.find(SOAP + "Body")
    child = list(body)[0]
    value = tree(child)
    if value == "" or value is None:
        value = {}
    print(json.dumps({"op": local(child.tag), "data": value}, ensure_ascii=False, sort_keys=True))


if __name__ == "__main__":
    main(sys.argv[1])
