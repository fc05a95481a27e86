package gap;

import java.security.MessageDigest;
import org.apache.commons.codec.digest.DigestUtils;

public class Fingerprints {
    public byte[] strong(byte[] data) throws Exception {
        return HashAlgorithm.STRONG.create().digest(data);
    }

    public String external(byte[] data) {
        return DigestUtils.sha256Hex(data);
    }

    public byte[] plain(byte[] data) throws Exception {
        MessageDigest md = MessageDigest.getInstance("SHA-384");
        return md.digest(data);
    }
}
